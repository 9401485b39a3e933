"""Command-line experiment harness.

Subcommands: params-table, ber, key-agreement, cipher, reduction-demo,
decision-to-search.  Every run is seeded, embeds its configuration in the
output, and reproduces byte-identical artifacts on re-run.

Configuration precedence: CLI flags > JSON config file (--config) > defaults.
"""

import argparse
import json
import subprocess
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .attacks import (ML_SPACE_GUARD, ber_experiment, bdd_via_mimo,
                      make_decision_oracle, make_exact_ml_oracle,
                      decision_to_search, toy_bdd_setup)
from .errors import ConfigurationError, CsikeyError
from .lattice import enumerate_cvp
from .numerics import make_rng
from .params import check_secrecy_constraints, design_table
from .protocols import (CipherContext, KeyAgreementConfig, decrypt, encrypt,
                        min_message_count, run_key_agreement)
from .wiretap import SystemParams, make_instance, sample_A_dist

SUBCOMMANDS = ("params-table", "ber", "key-agreement", "cipher",
               "reduction-demo", "decision-to-search")

DEFAULTS = {
    "n": 8, "m_rx": None, "log2m": 4, "alpha": 1.0, "k": 1.0,
    "m_slack": 1.0, "trials": 100, "seed": 0, "out": None, "format": "csv",
    "eta": 64, "coder": "repetition-3", "noise_scale": 1.0,
}


@dataclass
class ExperimentConfig:
    subcommand: str
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigurationError(f"unknown subcommand {self.subcommand!r}")
        merged = dict(DEFAULTS)
        merged.update({k: v for k, v in self.options.items() if v is not None})
        if merged["trials"] < 1:
            raise ConfigurationError("trials must be >= 1")
        if merged["format"] not in ("csv", "json"):
            raise ConfigurationError("format must be csv or json")
        self.options = merged

    def system_params(self) -> SystemParams:
        o = self.options
        n = int(o["n"])
        m_rx = int(o["m_rx"]) if o["m_rx"] is not None else 2 * n
        return SystemParams(n=n, m_rx=m_rx, M=2 ** int(o["log2m"]),
                            alpha=float(o["alpha"]), k=float(o["k"]),
                            m_slack=float(o["m_slack"]))


@dataclass
class ExperimentRecord:
    config: dict
    results: list
    wall_time: float
    version: str
    git_describe: str


def _git_describe() -> str:
    try:
        return subprocess.run(
            ["git", "describe", "--always", "--dirty"], capture_output=True,
            text=True, timeout=5, check=True).stdout.strip()
    except Exception:
        return "unknown"


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def rows_to_csv(rows: list) -> str:
    """Locale-independent CSV; floats at 17 significant digits."""
    if not rows:
        return ""
    cols = list(rows[0].keys())
    lines = [",".join(cols)]
    lines += [",".join(_fmt(row[c]) for c in cols) for row in rows]
    return "\n".join(lines) + "\n"


def _warn_gate(p: SystemParams):
    gate = check_secrecy_constraints(p)
    if not (gate.noise_ok and gate.constellation_ok):
        print(f"warning: parameters violate the secrecy constraint gate "
              f"(noise_ok={gate.noise_ok}, constellation_ok="
              f"{gate.constellation_ok})", file=sys.stderr)


def _run_params_table(cfg: ExperimentConfig) -> list:
    raw = cfg.options["n"]
    if raw == DEFAULTS["n"]:
        ns = [80, 128, 196, 256]
    else:
        ns = [int(s) for s in str(raw).split(",")]
    return design_table(ns, m_slack=float(cfg.options["m_slack"]))


def _run_ber(cfg: ExperimentConfig) -> list:
    p = cfg.system_params()
    _warn_gate(p)
    seed = int(cfg.options["seed"])
    methods = ["zf", "babai"]
    if p.M ** p.n <= min(ML_SPACE_GUARD, 10**5):
        methods.append("ml")
    results = ber_experiment(p, int(cfg.options["trials"]), methods,
                             make_rng(seed), seed=seed,
                             noise_scale=float(cfg.options["noise_scale"]))
    return [asdict(r) for r in results]


def _run_key_agreement(cfg: ExperimentConfig) -> list:
    p = cfg.system_params()
    _warn_gate(p)
    eta = int(cfg.options["eta"])
    ka = KeyAgreementConfig(p, eta, min_message_count(p, eta),
                            coder=cfg.options["coder"])
    transcript = run_key_agreement(ka, make_rng(int(cfg.options["seed"])),
                                   noise_scale=float(cfg.options["noise_scale"]))
    if cfg.options["format"] == "json":
        return [transcript]
    return [{k: transcript[k] for k in
             ("eta", "c", "coder", "message_errors", "alice_key", "bob_key",
              "success")}]


def _run_cipher(cfg: ExperimentConfig) -> list:
    p = cfg.system_params()
    _warn_gate(p)
    seed = int(cfg.options["seed"])
    rng = make_rng(seed)
    ctx = CipherContext.random(p, rng)
    trials = int(cfg.options["trials"])
    scale = float(cfg.options["noise_scale"])
    bit_errors = 0
    for _ in range(trials):
        inst = make_instance(p, rng)
        m = rng.integers(0, 2, size=p.n)
        enc = encrypt(ctx, m, inst, rng, noise_scale=scale)
        bit_errors += int(np.sum(decrypt(ctx, enc.channel_output, inst) != m))
    total = trials * p.n
    return [{"n": p.n, "M": p.M, "alpha": p.alpha, "k": p.k, "trials": trials,
             "bits": total, "bit_errors": bit_errors,
             "ber": bit_errors / total, "seed": seed}]


def _run_reduction_demo(cfg: ExperimentConfig) -> list:
    n = int(cfg.options["n"])
    if n > 4:
        raise ConfigurationError("reduction-demo supports n <= 4")
    rng = make_rng(int(cfg.options["seed"]))
    rows = []
    for trial in range(int(cfg.options["trials"])):
        p, inst, planted, r = toy_bdd_setup(n, rng)
        point, _ = bdd_via_mimo(inst, r, make_exact_ml_oracle(p), p, rng)
        ref, _ = enumerate_cvp(inst.basis, inst.target)
        match = bool(np.allclose(point, ref, atol=1e-6))
        rows.append({"trial": trial, "n": n,
                     "distance": float(np.linalg.norm(inst.target - point)),
                     "matches_enumeration": match})
    return rows


def _run_decision_to_search(cfg: ExperimentConfig) -> list:
    p = cfg.system_params()
    if p.n > 4 or p.M > 4:
        raise ConfigurationError("decision-to-search demo supports n <= 4, M <= 4")
    rng = make_rng(int(cfg.options["seed"]))
    rows = []
    for trial in range(int(cfg.options["trials"])):
        x = rng.integers(0, p.M, size=p.n)
        batch = sample_A_dist(x, p, rng, count=64 * p.n, noise_width=p.alpha)
        oracle = make_decision_oracle(p, noise_width=p.alpha)
        rec = decision_to_search(batch, oracle, p, rng, noise_width=p.alpha)
        rows.append({"trial": trial, "recovered": bool(np.array_equal(rec, x))})
    return rows


_RUNNERS = {
    "params-table": _run_params_table,
    "ber": _run_ber,
    "key-agreement": _run_key_agreement,
    "cipher": _run_cipher,
    "reduction-demo": _run_reduction_demo,
    "decision-to-search": _run_decision_to_search,
}


def run(cfg: ExperimentConfig) -> ExperimentRecord:
    start = time.monotonic()
    results = _RUNNERS[cfg.subcommand](cfg)
    echo = {k: v for k, v in cfg.options.items() if k != "out"}
    return ExperimentRecord(
        config={"subcommand": cfg.subcommand, **echo},
        results=results,
        wall_time=time.monotonic() - start,
        version=__version__,
        git_describe=_git_describe(),
    )


def render(record: ExperimentRecord, fmt: str) -> str:
    if fmt == "csv":
        header = f"# config: {json.dumps(record.config, sort_keys=True)}\n"
        return header + rows_to_csv(record.results)
    doc = asdict(record)
    doc.pop("wall_time")  # keep artifacts byte-identical across re-runs
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csikey",
        description="Seeded experiment harness for the massive-MIMO "
                    "physical-layer cryptosystem.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--n", help="antenna count (comma list for params-table)")
        sp.add_argument("--m-rx", type=int, dest="m_rx")
        sp.add_argument("--log2m", type=int)
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--k", type=float)
        sp.add_argument("--m-slack", type=float, dest="m_slack")
        sp.add_argument("--trials", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--config", help="JSON file with option defaults")
        sp.add_argument("--eta", type=int)
        sp.add_argument("--coder", choices=("none", "repetition-3"))
        sp.add_argument("--noise-scale", type=float, dest="noise_scale")
    return parser


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    subcommand = args.pop("subcommand")
    config_path = args.pop("config", None)
    options = {}
    if config_path:
        try:
            with open(config_path) as fh:
                options.update(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config file: {exc}", file=sys.stderr)
            return 2
    options.update({k: v for k, v in args.items() if v is not None})
    try:
        if subcommand != "params-table" and "n" in options \
                and options["n"] is not None:
            options["n"] = int(options["n"])
        cfg = ExperimentConfig(subcommand, options)
        record = run(cfg)
    except CsikeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = render(record, cfg.options["format"])
    out = cfg.options["out"]
    if out:
        try:
            with open(out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write output: {exc}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
