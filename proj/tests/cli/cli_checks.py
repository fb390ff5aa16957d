#!/usr/bin/env python3
"""Black-box checks of the lasrl CLI.

  cli_checks.py <lasrl> errors   exit codes and messages on bad input
  cli_checks.py <lasrl> repro    every subcommand twice; manifests must match
"""
import json
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

failures = []


def run(exe, args, cwd):
    return subprocess.run([exe, *args], cwd=cwd, capture_output=True, text=True)


def expect(name, cond, detail=""):
    print(("ok   " if cond else "FAIL ") + name)
    if not cond:
        failures.append(name)
        if detail:
            print("     " + detail.strip().replace("\n", "\n     "))


def check_errors(exe, work):
    (work / "unknown.json").write_text('{"seeds": 3, "bogus_key": 1}')
    r = run(exe, ["lemma-check", "--config", "unknown.json", "--out", "o1"], work)
    expect("unknown config key exits 2", r.returncode == 2, r.stderr)
    expect("unknown config key is named", "unknown config key 'bogus_key'" in r.stderr, r.stderr)
    expect("error is one line", r.stderr.count("\n") == 1 and r.stderr.startswith("lasrl: error: "), r.stderr)

    (work / "broken.json").write_text("{not json")
    r = run(exe, ["lemma-check", "--config", "broken.json", "--out", "o2"], work)
    expect("malformed config exits 2", r.returncode == 2, r.stderr)

    r = run(exe, ["lemma-check", "--seeds", "many", "--out", "o3"], work)
    expect("badly typed flag exits 2", r.returncode == 2, r.stderr)

    r = run(exe, ["lemma-check", "--seeds", "0", "--out", "o4"], work)
    expect("zero seeds exits 2", r.returncode == 2, r.stderr)

    r = run(exe, ["lemma-check", "--format-version", "2", "--out", "o5"], work)
    expect("unsupported format version exits 2", r.returncode == 2, r.stderr)

    r = run(exe, ["reproduce", "fig9", "--out", "o6"], work)
    expect("unknown figure exits 2", r.returncode == 2, r.stderr)

    r = run(exe, ["decode", "--out", "o7"], work)
    expect("missing required key exits 2", r.returncode == 2 and "is required" in r.stderr, r.stderr)

    r = run(exe, ["decode", "--model", "missing.ckpt", "--data", "nowhere", "--out", "o8"], work)
    expect("missing model file fails", r.returncode != 0, r.stderr)

    (work / "garbage.ckpt").write_bytes(b"LASRL\x00garbage")
    r = run(exe, ["decode", "--model", "garbage.ckpt", "--data", "nowhere", "--out", "o9"], work)
    expect("corrupt checkpoint exits 2", r.returncode == 2, r.stderr)

    r = run(exe, ["lemma-check", "--seeds", "12", "--out", "lc"], work)
    expect("lemma-check passes", r.returncode == 0 and "lemma 1: 12/12 pass" in r.stdout, r.stdout + r.stderr)
    for name in ("config.resolved.json", "manifest.json", "timing.json", "lemma_check.csv"):
        expect("lemma-check writes " + name, (work / "lc" / name).exists())

    r = run(exe, ["--version"], work)
    expect("--version exits 0", r.returncode == 0 and r.stdout.strip() != "", r.stderr)


def pipeline(exe, work):
    """Small end-to-end run of every subcommand. Returns {out_dir: manifest}."""
    steps = [
        ("data", ["gen-data", "--source-lexemes", "8", "--inflections", "3", "--synonym-lexemes", "2",
                  "--train-size", "60", "--valid-size", "20", "--test-size", "20", "--embedding-dim", "6"]),
        ("mle", ["train-mle", "--data", "data", "--dim", "6", "--mle-epochs", "2",
                 "--embedding-table", "data/shared_inflection.vec"]),
        ("dec", ["decode", "--model", "mle/model.ckpt", "--data", "data", "--beam", "3"]),
        ("mrt", ["mrt-finetune", "--model", "mle/model.ckpt", "--data", "data", "--k", "3", "--mrt-epochs", "1"]),
        ("rank", ["rank-analysis", "--before", "mle/model.ckpt", "--after", "mrt/model.ckpt", "--data", "data"]),
        ("peak", ["peakiness", "--models", "mle/model.ckpt,mrt/model.ckpt", "--data", "data"]),
        ("emb", ["embed-analysis", "--model", "mle/model.ckpt", "--data", "data", "--per-list", "20"]),
        ("lemma", ["lemma-check", "--seeds", "9"]),
        ("bandit", ["bandit", "--steps", "200", "--trials", "2", "--hidden", "8", "--final-window", "50",
                    "--K", "3", "--a", "5"]),
        ("fig2", ["reproduce", "fig2", "--steps", "200", "--trials", "2", "--hidden", "8", "--final-window", "50",
                  "--K", "3", "--a", "5"]),
        ("fig1", ["reproduce", "fig1-analog", "--train-size", "60", "--valid-size", "20", "--dim", "6",
                  "--mle-epochs", "2", "--mrt-epochs", "1", "--k", "3"]),
        ("fig4", ["reproduce", "fig4-analog", "--train-size", "60", "--valid-size", "20", "--dim", "6",
                  "--mle-epochs", "2", "--per-list", "20"]),
    ]
    manifests = {}
    for out, args in steps:
        r = run(exe, [*args, "--out", out], work)
        ok = r.returncode == 0
        expect(f"{out}: {args[0]} runs", ok, r.stderr)
        if ok:
            manifests[out] = json.loads((work / out / "manifest.json").read_text())
    return manifests


def check_repro(exe, work):
    a = pipeline(exe, work / "a")
    b = pipeline(exe, work / "b")
    for out, m in a.items():
        expect(f"{out}: manifest is reproducible", b.get(out) == m,
               json.dumps(m, indent=1) + "\nvs\n" + json.dumps(b.get(out), indent=1))
        for name, digest in m["artifacts"].items():
            if name == "config.resolved.json":
                expect(f"{out}: config digest matches the resolved dump", m["config_digest"] == digest)


def main():
    exe = str(Path(sys.argv[1]).resolve())
    mode = sys.argv[2]
    work = Path(tempfile.mkdtemp(prefix="lasrl_cli_"))
    try:
        if mode == "errors":
            check_errors(exe, work)
        else:
            (work / "a").mkdir()
            (work / "b").mkdir()
            check_repro(exe, work)
    finally:
        shutil.rmtree(work, ignore_errors=True)
    print(f"{len(failures)} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
