import json

import pytest

from csikey.cli import (DEFAULTS, ExperimentConfig, build_parser, main,
                        render, rows_to_csv, run)
from csikey.errors import ConfigurationError


def test_unknown_subcommand_rejected():
    with pytest.raises(ConfigurationError):
        ExperimentConfig("frobnicate")


def test_config_validation():
    with pytest.raises(ConfigurationError):
        ExperimentConfig("ber", {"trials": 0})
    with pytest.raises(ConfigurationError):
        ExperimentConfig("ber", {"format": "xml"})


def test_defaults_merge_and_flag_precedence(tmp_path):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"n": 6, "trials": 7, "seed": 3}))
    out = tmp_path / "o.csv"
    rc = main(["ber", "--config", str(cfg_file), "--trials", "5",
               "--out", str(out)])
    assert rc == 0
    header = out.read_text().splitlines()[0]
    echoed = json.loads(header.split("# config: ", 1)[1])
    assert echoed["trials"] == 5   # flag wins over config file
    assert echoed["n"] == 6        # config file wins over default
    assert echoed["seed"] == 3


def test_params_table_csv(capsys):
    rc = main(["params-table"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[1] == "n,log2M,snr_db,capacity"
    assert len(lines) == 6  # comment + header + 4 rows
    first = lines[2].split(",")
    assert first[0] == "80"
    assert abs(float(first[1]) - 33.66) < 0.05


def test_params_table_custom_ns(capsys):
    rc = main(["params-table", "--n", "128,256"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert [row.split(",")[0] for row in lines[2:]] == ["128", "256"]


def test_ber_deterministic_rerun(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["ber", "--n", "8", "--trials", "10", "--seed", "7",
                     "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_ber_csv_columns(tmp_path):
    out = tmp_path / "o.csv"
    main(["ber", "--n", "4", "--trials", "5", "--seed", "1", "--out", str(out)])
    lines = out.read_text().splitlines()
    assert lines[1] == "method,n,M,alpha,k,trials,ser,ser_ci_low,ser_ci_high,seed"


def test_json_format_roundtrip(tmp_path):
    out = tmp_path / "o.json"
    assert main(["ber", "--n", "4", "--trials", "5", "--seed", "1",
                 "--format", "json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["config"]["subcommand"] == "ber"
    assert doc["config"]["seed"] == 1
    assert {"version", "git_describe", "results"} <= set(doc)


def test_reduction_demo(capsys):
    rc = main(["reduction-demo", "--n", "3", "--trials", "2", "--seed", "1"])
    assert rc == 0
    outp = capsys.readouterr().out
    assert outp.count("True") == 2


def test_decision_to_search_demo(capsys):
    rc = main(["decision-to-search", "--n", "3", "--log2m", "2",
               "--alpha", "0.05", "--trials", "2"])
    assert rc == 0
    assert capsys.readouterr().out.count("True") == 2


def test_key_agreement_and_cipher_subcommands(tmp_path):
    out = tmp_path / "ka.json"
    assert main(["key-agreement", "--n", "8", "--log2m", "4", "--alpha",
                 "0.001", "--eta", "16", "--noise-scale", "0",
                 "--format", "json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["results"][0]["success"] is True
    out2 = tmp_path / "c.csv"
    assert main(["cipher", "--n", "8", "--log2m", "4", "--alpha", "0.001",
                 "--trials", "5", "--noise-scale", "0",
                 "--out", str(out2)]) == 0
    assert out2.read_text().splitlines()[-1].split(",")[-2] == "0"


def test_invalid_config_exit_codes(tmp_path, capsys):
    assert main(["ber", "--trials", "0"]) == 1
    assert "error:" in capsys.readouterr().err
    assert main(["ber", "--config", str(tmp_path / "nope.json")]) == 2


def test_rows_to_csv_17_digits():
    text = rows_to_csv([{"x": 1.0 / 3.0}])
    assert text == "x\n0.33333333333333331\n"


def test_parser_has_all_subcommands():
    parser = build_parser()
    # parsing each subcommand with no extra flags succeeds
    for name in ("params-table", "ber", "key-agreement", "cipher",
                 "reduction-demo", "decision-to-search"):
        args = parser.parse_args([name])
        assert args.subcommand == name


def test_run_returns_record():
    rec = run(ExperimentConfig("params-table", {}))
    assert rec.version
    assert len(rec.results) == 4
    assert DEFAULTS["format"] == "csv"
