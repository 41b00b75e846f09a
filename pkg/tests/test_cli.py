import json
from importlib import resources

import pytest

from lowparse.cli import EXIT_INVALID, EXIT_OK, EXIT_USAGE, run
from lowparse.conllu import read_conllu
from lowparse.runinfo import ConfigError, parse_config, sha256_file

TOY = resources.files("lowparse.data").joinpath("toy")
TGT = str(TOY.joinpath("tgt_train.conllu"))
DEV = str(TOY.joinpath("tgt_dev.conllu"))
SRC = str(TOY.joinpath("src_train.conllu"))
TINY = ["--dim-word", "8", "--dim-char", "4", "--dim-char-lstm", "4", "--dim-word-lstm", "4",
        "--dim-lang", "3", "--dim-mlp-hidden", "8", "--epochs-max", "1", "--patience", "1"]

ROOTLESS = "# sent_id = r1\n1\ta\t_\tX\t_\t_\t0\tnsubj\t_\t_\n\n"


def manifest(directory):
    return json.loads((directory / "manifest.json").read_text(encoding="utf-8"))


def small(tmp_path, name="small.conllu", count=12, source=TGT):
    tb = read_conllu(source)
    path = tmp_path / name
    path.write_text("".join(
        "\n".join(s.comments + tuple(t.to_line() for t in s.tokens)) + "\n\n"
        for s in tb.sentences[:count]
    ), encoding="utf-8")
    return str(path)


def test_usage_errors(capsys):
    assert run([]) == EXIT_USAGE
    assert run(["frobnicate"]) == EXIT_USAGE
    assert run(["--version"]) == EXIT_OK
    assert run(["split", "--input", "nope.conllu", "--train-out", "a", "--dev-out", "b"]) == EXIT_USAGE
    assert "input file not found: nope.conllu" in capsys.readouterr().err
    assert run(["split"]) == EXIT_USAGE
    assert "--input" in capsys.readouterr().err


def test_validate(tmp_path, capsys):
    assert run(["validate", TGT, DEV]) == EXIT_OK
    bad = tmp_path / "rootless.conllu"
    bad.write_text(ROOTLESS, encoding="utf-8")
    assert run(["validate", str(bad)]) == EXIT_INVALID
    assert "rootless" in capsys.readouterr().out
    assert run(["validate", "--level", "structure", str(bad)]) == EXIT_OK
    broken = tmp_path / "broken.conllu"
    broken.write_text("1\ta\t_\tX\t_\t_\t1\troot\t_\t_\n\n", encoding="utf-8")
    assert run(["validate", str(broken)]) == EXIT_INVALID


def test_split_manifest_and_config_override(tmp_path):
    out = tmp_path / "split"
    cfg = tmp_path / "split.cfg"
    cfg.write_text("ratio = 0.2\nseed = 4\n", encoding="utf-8")
    args = ["split", "--config", str(cfg), "--input", TGT,
            "--train-out", str(out / "train.conllu"), "--dev-out", str(out / "dev.conllu")]
    assert run(args) == EXIT_OK
    assert len(read_conllu(out / "train.conllu")) == 60
    m = manifest(out)
    assert m["seed"] == 4 and m["config"]["ratio"] == 0.2
    assert m["outputs"]["train.conllu"] == sha256_file(out / "train.conllu")
    assert m["inputs"][TGT] == sha256_file(TGT)
    assert {"tool", "version", "command", "duration_seconds"} <= set(m)
    # the flag wins over the config file
    assert run(args + ["--ratio", "0.5"]) == EXIT_OK
    assert len(read_conllu(out / "train.conllu")) == 150


def test_config_errors(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("seed = 1\nseed = 2\n", encoding="utf-8")
    assert run(["subsample", "--config", str(cfg), "--input", TGT, "--output", "x", "--count", "2"]) == EXIT_USAGE
    cfg.write_text("count = many\n", encoding="utf-8")
    assert run(["subsample", "--config", str(cfg), "--input", TGT, "--output", "x"]) == EXIT_USAGE
    with pytest.raises(ConfigError, match=":2: expected"):
        parse_config("a = 1\njunk\n")
    assert parse_config("# c\nP-Crop = 0.5\n") == {"p_crop": "0.5"}


def test_subsample_and_stats(tmp_path, capsys):
    out = tmp_path / "sub.conllu"
    assert run(["subsample", "--input", TGT, "--output", str(out), "--count", "30", "--seed", "2"]) == EXIT_OK
    assert len(read_conllu(out)) == 30
    assert run(["subsample", "--input", TGT, "--output", str(out), "--count", "3000"]) == EXIT_USAGE
    capsys.readouterr()
    assert run(["stats", "--target", TGT, "--source", SRC, "--output", str(tmp_path / "s.txt")]) == EXIT_OK
    text = capsys.readouterr().out
    assert "token_overlap\t" in text and "char3_overlap\t" in text
    assert (tmp_path / "manifest.json").exists()


def test_augment_commands(tmp_path):
    src = small(tmp_path)
    morph = tmp_path / "morph.conllu"
    assert run(["augment-morph", "--input", src, "--output", str(morph), "--p-crop", "1",
                "--p-rotate", "1", "--seed", "3"]) == EXIT_OK
    tb = read_conllu(morph)
    assert len(tb) > 12
    assert any("# augmented = morph:" in c for s in tb.sentences[12:] for c in s.comments)
    assert run(["augment-morph", "--input", src, "--output", str(morph), "--p-crop", "2"]) == EXIT_USAGE
    nonce = tmp_path / "nonce.conllu"
    assert run(["augment-nonce", "--input", src, "--output", str(nonce), "--copies", "2",
                "--index-from", TGT]) == EXIT_OK
    assert len(read_conllu(nonce)) == 36


def test_translit_commands(tmp_path):
    conllu = tmp_path / "tr.conllu"
    conllu.write_text("1\tçağrı\tçağrı\tNOUN\t_\t_\t0\troot\t_\t_\n\n", encoding="utf-8")
    out = tmp_path / "out" / "tr.conllu"
    assert run(["translit", "--input", str(conllu), "--output", str(out), "--table", "turkish_fold"]) == EXIT_OK
    assert read_conllu(out)[0].tokens[0].form == "cagri"
    vec = tmp_path / "kk.vec"
    vec.write_text("1 2\nкөп 0.5 1\n", encoding="utf-8")
    vout = tmp_path / "out" / "kk.vec"
    assert run(["translit", "--input", str(vec), "--output", str(vout), "--table", "kazakh_cyr_lat",
                "--format", "word2vec"]) == EXIT_OK
    assert vout.read_text(encoding="utf-8").splitlines()[1].startswith("kop ")
    assert run(["translit", "--input", str(conllu), "--output", str(out), "--table", "no_such"]) == EXIT_USAGE


def test_oracle_command(capsys):
    assert run(["oracle", "--input", DEV]) == EXIT_OK
    first = capsys.readouterr().out.splitlines()[0]
    assert "SHIFT" in first and "RIGHT_ARC(root)" in first


def test_model_commands_end_to_end(tmp_path, capsys):
    train = small(tmp_path, "train.conllu", 12)
    dev = small(tmp_path, "dev.conllu", 6, DEV)
    src = small(tmp_path, "src.conllu", 12, SRC)
    model = tmp_path / "m" / "model.pt"
    assert run(["train", "--train", f"src:{src}", "--train", f"tgt:{train}", "--dev", f"tgt:{dev}",
                "--model-out", str(model), *TINY]) == EXIT_OK
    assert "model.pt" in manifest(model.parent)["outputs"]
    tuned = tmp_path / "ft" / "model.pt"
    assert run(["finetune", "--model", str(model), "--train", f"tgt:{train}", "--dev", f"tgt:{dev}",
                "--model-out", str(tuned), "--epochs-max", "1", "--patience", "1"]) == EXIT_OK
    assert "->" in capsys.readouterr().out
    assert run(["finetune", "--model", str(model), "--train", f"zz:{train}", "--dev", f"zz:{dev}",
                "--model-out", str(tuned)]) == EXIT_INVALID
    pred = tmp_path / "p" / "pred.conllu"
    assert run(["parse", "--model", str(tuned), "--input", f"tgt:{dev}", "--output", str(pred)]) == EXIT_OK
    assert run(["parse", "--model", str(tuned), "--input", f"xx:{dev}", "--output", str(pred)]) == EXIT_USAGE
    assert run(["parse", "--model", str(tuned), "--input", f"xx:{dev}", "--output", str(pred),
                "--fallback-language", "tgt"]) == EXIT_OK
    capsys.readouterr()
    assert run(["eval", "--gold", dev, "--pred", str(pred), "--output", str(tmp_path / "e" / "eval.txt")]) == EXIT_OK
    assert "LAS\t" in capsys.readouterr().out
    assert run(["eval", "--gold", dev, "--pred", train]) == EXIT_INVALID
    assert run(["parse", "--model", train, "--input", dev, "--output", str(pred)]) == EXIT_INVALID

    probe_out = tmp_path / "probe" / "probe.txt"
    assert run(["probe", "--model", str(tuned), "--lang", "tgt", "--train", train, "--dev", dev,
                "--output", str(probe_out)]) == EXIT_OK
    assert (probe_out.parent / "probe_train.word.tsv").exists()
    assert run(["probe", "--train", train, "--dev", dev]) == EXIT_USAGE
    nn_out = tmp_path / "nn" / "nn.txt"
    assert run(["neighbors", "--model", str(tuned), "--target", f"tgt:{dev}", "--source", f"src:{src}",
                "--filter-gold", dev, "--filter-pred-a", str(pred), "--filter-pred-b", dev,
                "--output", str(nn_out)]) == EXIT_OK
    # B is the gold itself, so A never wins and no target token survives the filter
    assert len(nn_out.read_text(encoding="utf-8").split("sent_id\t")[1].splitlines()) == 1
    diff = tmp_path / "cd" / "diff.csv"
    assert run(["confusion-diff", "--gold", dev, "--pred-a", str(pred), "--pred-b", dev,
                "--output", str(diff)]) == EXIT_OK
    assert diff.read_text(encoding="utf-8").startswith("gold,")


def test_pipeline_errors(tmp_path):
    cfg = tmp_path / "x.cfg"
    cfg.write_text("target_train = toy:tgt_train.conllu\nbogus = 1\n", encoding="utf-8")
    assert run(["pipeline", str(cfg), "--out-dir", str(tmp_path / "o")]) == EXIT_USAGE
    cfg.write_text("target_train = missing.conllu\ncross_lingual = false\n", encoding="utf-8")
    assert run(["pipeline", str(cfg), "--out-dir", str(tmp_path / "o")]) == EXIT_USAGE
    assert run(["pipeline", str(tmp_path / "none.cfg")]) == EXIT_USAGE


def test_pipeline_small(tmp_path, capsys):
    cfg = tmp_path / "p.cfg"
    cfg.write_text(
        "seed = 2\ntarget_train = toy:tgt_train.conllu\nsubsample = 10\naugment = morph+nonce\n"
        "nonce_copies = 1\ncross_lingual = false\n"
        "dim_word = 8\ndim_char = 4\ndim_char_lstm = 4\ndim_word_lstm = 4\ndim_lang = 3\n"
        "dim_mlp_hidden = 8\nepochs_max = 1\npatience = 1\n",
        encoding="utf-8",
    )
    out = tmp_path / "run"
    assert run(["pipeline", str(cfg), "--out-dir", str(out)]) == EXIT_OK
    assert "dev LAS" in capsys.readouterr().out
    m = manifest(out)
    assert {"model.pt", "dev.pred.conllu", "eval.txt", "data/train.conllu", "data/dev.conllu"} <= set(m["outputs"])
    assert m["seed"] == 2
