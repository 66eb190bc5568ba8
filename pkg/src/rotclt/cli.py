"""``rotclt`` command line: reproducible experiments with JSON/CSV outputs.

Every output embeds the resolved configuration (minus ``threads``, which
never changes results). Exit codes: 0 success, 1 usage, 2 mathematical
error (resonance, infeasible construction), 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction

from . import construct as C
from .chain import FiniteChain, rho_bounds, verify_mixing
from .diophantine import Angle, build_liouville, make_witness
from .exact import fraction_str
from .observable import CosineSeries
from .spectral import ResonanceError, sigma2, spectral_report
from .walk import WalkConfig, exact_tail, mc_clt, mc_tail

PRESETS = ("golden-c1", "lemma1-faithful", "lemma3", "theorem1-toy")

EXIT_OK, EXIT_USAGE, EXIT_MATH, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- parsing of angles and series ----------------------------------------------

def _load_json(path: str) -> dict:
    with open(path) as f:
        return json.load(f)


def parse_angle(spec: str) -> Angle:
    """``golden``, ``p/q`` (or a decimal), ``liouville:E:LEVELS[:a0,a1,..]`` or a JSON file."""
    spec = str(spec).strip()
    if spec.endswith(".json") or os.path.isfile(spec):
        d = _load_json(spec)
        if "ledger" in d:
            d = d["ledger"]
        if "levels" in d:
            return C.ConstructionLedger.from_json(d).limit_angle
        if "angle" in d and isinstance(d["angle"], dict):
            d = d["angle"]
        return Angle.from_json(d)
    if spec == "golden":
        return Angle.golden_conjugate()
    if spec.startswith("liouville:"):
        parts = spec.split(":")
        if len(parts) not in (3, 4):
            raise UsageError("liouville angles are written liouville:E:LEVELS[:a0,a1,...]")
        e, levels = parts[1], int(parts[2])
        sched = (lambda k: k) if e == "k" else (lambda k, v=Fraction(e): v)
        prefix = tuple(int(v) for v in parts[3].split(",")) if len(parts) == 4 else (0,)
        return build_liouville(sched, levels, prefix=prefix)
    try:
        return Angle.rational(Fraction(spec))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse angle {spec!r}")


def parse_series(spec: str) -> CosineSeries:
    """``q:a,q:a,...`` with exact amplitudes, ``zero``, or a JSON file."""
    spec = str(spec).strip()
    if spec in ("", "0", "zero"):
        return CosineSeries.empty()
    if spec.endswith(".json") or os.path.isfile(spec):
        d = _load_json(spec)
        if "ledger" in d:
            d = d["ledger"]
        if "series" in d:
            d = d["series"]
        return CosineSeries.from_json(d)
    terms = []
    try:
        for item in spec.split(","):
            q, a = item.split(":")
            terms.append((int(q), Fraction(a)))
        return CosineSeries(tuple(sorted(terms)))
    except ValueError as e:
        raise UsageError(f"cannot parse series {spec!r}: {e}")


def _frac(v) -> Fraction:
    try:
        return Fraction(str(v))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a number: {v!r}")


# -- output --------------------------------------------------------------------

def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    d = os.path.dirname(out)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(out, "w") as f:
        f.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _emit(cfg: dict, result: dict, csv_text: str | None = None):
    if cfg.get("format") == "csv":
        if csv_text is None:
            raise UsageError(f"{cfg['command']} has no csv output")
        _write(csv_text, cfg.get("out"))
    else:
        _write(_dump({"command": cfg["command"], "config": _public(cfg), "result": result}), cfg.get("out"))


def _public(cfg: dict) -> dict:
    # threads and output paths do not affect numbers
    return {k: v for k, v in sorted(cfg.items()) if k not in ("threads", "out", "format", "config", "command")}


# -- commands --------------------------------------------------------------------

def cmd_spectrum(cfg):
    a, s = parse_angle(cfg["angle"]), parse_series(cfg["series"])
    cutoff = int(cfg["cutoff"]) if cfg.get("cutoff") is not None else max(s.max_frequency, 1)
    rep = spectral_report(s, a, cutoff)
    _emit(cfg, rep.to_json(), rep.to_csv())
    return EXIT_OK


def _walk_cfg(cfg, s_default="1") -> WalkConfig:
    return WalkConfig(parse_angle(cfg["angle"]), int(cfg["n"]), int(cfg["m"]), _frac(cfg.get("s") or s_default),
                      seed=int(cfg["seed"]), threads=int(cfg["threads"]))


def cmd_tail(cfg):
    w = _walk_cfg(cfg)
    est = mc_tail(w, parse_series(cfg["series"]), float(_frac(cfg["t"])), bool(cfg["two_sided"]),
                  bool(cfg["inclusive"]), float(cfg["confidence"]))
    row = [est.threshold, est.estimate, est.lo, est.hi, est.trials, est.successes, est.seed]
    _emit(cfg, est.to_json(), _csv(["threshold", "estimate", "lo", "hi", "trials", "successes", "seed"], [row]))
    return EXIT_OK


def cmd_clt(cfg):
    a, s = parse_angle(cfg["angle"]), parse_series(cfg["series"])
    sig = float(cfg["sigma"]) if cfg.get("sigma") is not None else math.sqrt(sigma2(s, a))
    w = WalkConfig(a, int(cfg["n"]), int(cfg["m"]), Fraction(1), seed=int(cfg["seed"]), threads=int(cfg["threads"]))
    rep = mc_clt(w, s, sig)
    row = [rep.mean, rep.variance, rep.sigma, rep.ks, rep.critical, rep.ks_pass, rep.trials, rep.seed]
    _emit(cfg, rep.to_json(), _csv(["mean", "variance", "sigma", "ks", "critical", "ks_pass", "trials", "seed"], [row]))
    return EXIT_OK


def cmd_exact(cfg):
    a, s = parse_angle(cfg["angle"]), parse_series(cfg["series"])
    n = int(cfg["n"])
    if not 1 <= n <= 20:
        raise UsageError("exact enumeration needs 1 <= n <= 20")
    t = _frac(cfg["t"])
    s_exp = _frac(cfg.get("s") or "1")
    M = int(cfg["M"]) if cfg.get("M") else None
    p = exact_tail(s, a, n, t, s_exp, M, bool(cfg["two_sided"]), bool(cfg["inclusive"]))
    result = {"exact": p}
    rows = [["exact", p, "", "", ""]]
    if int(cfg.get("mc") or 0) > 0:
        w = WalkConfig(a, n, int(cfg["mc"]), s_exp, seed=int(cfg["seed"]), threads=int(cfg["threads"]))
        est = mc_tail(w, s, float(t), bool(cfg["two_sided"]), bool(cfg["inclusive"]))
        agree = est.lo <= p <= est.hi
        result.update({"mc": est.to_json(), "agree": agree})
        rows.append(["mc", est.estimate, est.lo, est.hi, agree])
    _emit(cfg, result, _csv(["method", "estimate", "lo", "hi", "agree"], rows))
    return EXIT_OK


def _default_t2_angle(theorem: int, gamma, depth: int) -> Angle:
    if theorem == 3:
        return build_liouville(lambda k: k, 2 * depth + 3)
    return build_liouville(lambda k, g=Fraction(gamma): g, 2 * depth + 1, prefix=(0, 10))


def _write_construction(cfg, ledger: C.ConstructionLedger, angle: Angle, series: CosineSeries):
    pub = _public(cfg)
    files = {
        "ledger.json": {"command": "construct", "config": pub, "ledger": ledger.to_json()},
        "angle.json": {"command": "construct", "config": pub, "angle": angle.to_json(n_convergents=0)},
        "series.json": {"command": "construct", "config": pub, "series": series.to_json()},
    }
    out = cfg.get("out")
    if out is None:
        _write(_dump(files["ledger.json"]), None)
        return
    os.makedirs(out, exist_ok=True)
    for name, obj in files.items():
        _write(_dump(obj), os.path.join(out, name))


def cmd_construct(cfg):
    th = int(cfg["theorem"])
    depth = int(cfg["depth"])
    s = _frac(cfg["s"]) if cfg.get("s") is not None else None
    if th == 1:
        amps = [_frac(v) for v in cfg["amplitudes"].split(",")] if cfg.get("amplitudes") else None
        n_min = [int(v) for v in str(cfg["n_min"]).split(",")] if cfg.get("n_min") else None
        angle, series, ledger = C.theorem1_build(s if s is not None else Fraction(3, 5), depth,
                                                 "faithful" if cfg.get("faithful") else "toy", amps,
                                                 n_min=n_min)
    elif th in (2, 3):
        angle = parse_angle(cfg["angle"]) if cfg.get("angle") else _default_t2_angle(th, cfg["gamma"], depth)
        if th == 2:
            series, ledger = C.theorem2_build(angle, _frac(cfg["gamma"]), _frac(cfg["c"]), s, depth)
        else:
            series, ledger = C.theorem2_build(angle, s=s, depth=depth, schedule=lambda k: k)
            ledger.params["smoothness"] = C.smoothness_certificate(ledger)
    else:
        raise UsageError("--theorem must be 1, 2 or 3")
    if int(cfg.get("evidence") or 0) > 0:
        C.gather_evidence(ledger, int(cfg["evidence"]), int(cfg["seed"]), int(cfg["threads"]))
    _write_construction(cfg, ledger, angle, series)
    return EXIT_OK


def cmd_verify(cfg):
    d = _load_json(cfg["ledger"])
    if "ledger" in d:
        d = d["ledger"]
    try:
        ledger = C.ConstructionLedger.from_json(d)
    except (KeyError, ValueError, TypeError) as e:
        rep = C.VerifyReport([("ledger", 0, None, "", False, f"unreadable ledger: {e}")])
    else:
        rep = C.verify_ledger(ledger)
    rows = [[n, k, "" if i is None else i, note, ok, det] for n, k, i, note, ok, det in rep.lines]
    _emit(cfg, rep.to_json(), _csv(["name", "level", "i", "note", "ok", "detail"], rows))
    for n, k, i, note, ok, det in rep.failures:
        where = f"level {k}" + (f", i={i}" if i is not None else "") + (f", {note}" if note else "")
        print(f"FAIL {n} ({where}): {det}", file=sys.stderr)
    return EXIT_OK if rep.ok else EXIT_VERIFY


def cmd_chain(cfg):
    c = FiniteChain(int(cfg["q"]), int(cfg["p"]))
    rows = verify_mixing(c, int(cfg["horizon"]))
    lo, hi = rho_bounds(c.q)
    res = {"q": c.q, "p": c.p, "rho_lower": fraction_str(lo), "rho_upper": fraction_str(hi),
           "all_ok": all(ok for _, _, ok in rows),
           "rows": [{"n": n, "deviation": fraction_str(d), "ok": ok} for n, d, ok in rows]}
    _emit(cfg, res, _csv(["n", "deviation", "deviation_float", "ok"], [[n, fraction_str(d), float(d), ok]
                                                                     for n, d, ok in rows]))
    return EXIT_OK if res["all_ok"] else EXIT_VERIFY


# -- presets ---------------------------------------------------------------------

def _preset_golden_c1(cfg):
    a = Angle.golden_conjugate()
    qs = [a.convergent(k)[1] for k in range(2, 26)]
    eps_list = (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))
    rows, clt = [], []
    for eps in eps_list:
        s = CosineSeries(tuple((q, float(q) ** -float(1 + eps)) for q in qs))
        acc = 0.0
        for q, lam, kv, _, _ in spectral_report(s, a, qs[-1]).rows:
            acc += kv
            rows.append([fraction_str(eps), q, lam, kv, acc])
        sig = math.sqrt(sigma2(s, a))
        for n in (1000, 10000):
            w = WalkConfig(a, n, int(cfg["m"]), Fraction(1), seed=int(cfg["seed"]), threads=int(cfg["threads"]))
            rep = mc_clt(w, s, sig)
            clt.append({"epsilon": fraction_str(eps), "n": n, "variance": rep.variance, "sigma2": sig * sig,
                        "ks": rep.ks, "critical": rep.critical})
    header = ["epsilon", "frequency", "eigenvalue", "kv_term", "kv_partial"]
    result = {"scan": [dict(zip(header, r)) for r in rows], "clt": clt}
    return result, _csv(header, rows)


def _preset_lemma1(cfg):
    s = Fraction(3, 5)
    _, _, ledger = C.theorem1_build(s, 1, "faithful", n_min=[5800])
    ap = ledger.final_alpha
    cert = C.lemma1_check(ap, 3, 5800, s)
    w = WalkConfig(Angle.rational(ap), 5800, int(cfg["m"]), s, seed=int(cfg["seed"]), threads=int(cfg["threads"]))
    est = mc_tail(w, CosineSeries.single(3, Fraction(1, 8)), 2.0)
    res = {"certificate": cert.to_json(), "tail": est.to_json(), "target": "1/6",
           "supported": est.lo >= 1 / 6 - 0.01}
    return res, _csv(["estimate", "lo", "hi", "target"], [[est.estimate, est.lo, est.hi, "1/6"]])


def _preset_lemma3(cfg):
    s = Fraction(3, 5)
    a = build_liouville(lambda k: 6, 2, prefix=(0, 10))
    par = C.lemma3_params(make_witness(a, *a.convergent(1), 6, 1), s)
    w = WalkConfig(a, par.N, int(cfg["m"]), s, seed=int(cfg["seed"]), threads=int(cfg["threads"]))
    est = mc_tail(w, par.series, float(par.threshold))
    res = {"params": par.to_json(), "tail": est.to_json(), "target": "1/8", "supported": est.lo >= 1 / 8 - 0.01}
    return res, _csv(["estimate", "lo", "hi", "target"], [[est.estimate, est.lo, est.hi, "1/8"]])


def _preset_theorem1_toy(cfg):
    _, _, ledger = C.theorem1_build(Fraction(3, 5), 3)
    ev = C.gather_evidence(ledger, int(cfg["m"]), int(cfg["seed"]), int(cfg["threads"]))
    rep = C.verify_ledger(ledger)
    res = {"ledger": ledger.to_json(), "verify_ok": rep.ok, "evidence": ev}
    rows = [[e["level"], e["N"], e.get("estimate", ""), e["status"]] for e in ev]
    return res, _csv(["level", "N", "estimate", "status"], rows)


def cmd_preset(cfg):
    name = cfg["name"]
    fn = {"golden-c1": _preset_golden_c1, "lemma1-faithful": _preset_lemma1, "lemma3": _preset_lemma3,
          "theorem1-toy": _preset_theorem1_toy}.get(name)
    if fn is None:
        raise UsageError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    if cfg.get("format") is None:
        cfg["format"] = "csv" if name == "golden-c1" else "json"
    res, text = fn(cfg)
    _emit(cfg, res, text)
    return EXIT_OK


# -- argument parsing ------------------------------------------------------------

DEFAULTS = {
    "spectrum": {"angle": "golden", "series": "1:1", "cutoff": None},
    "tail": {"angle": "golden", "series": "1:1", "n": 1000, "m": 10000, "s": "3/5", "t": "1",
             "two_sided": False, "inclusive": False, "confidence": 0.99},
    "clt": {"angle": "golden", "series": "1:1", "n": 10000, "m": 10000, "sigma": None},
    "exact": {"angle": "golden", "series": "1:1", "n": 10, "t": "1", "s": "1", "M": None, "mc": 0,
              "two_sided": False, "inclusive": False},
    "construct": {"theorem": 1, "s": None, "depth": 1, "faithful": False, "amplitudes": None, "n_min": None,
                  "gamma": "6", "c": "1", "angle": None, "evidence": 0},
    "verify": {"ledger": None},
    "chain": {"q": 3, "p": 1, "horizon": 64},
    "preset": {"name": None, "m": 100000},
}
COMMON = {"seed": 0, "threads": 1, "out": None, "format": None}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--config", default=None, help="JSON file with parameter values")

    p = _Parser(prog="rotclt", description="Random rotations of the circle: CLT experiments and constructions")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def walk_args(sp, exact=False):
        sp.add_argument("--angle")
        sp.add_argument("--series")
        sp.add_argument("--n", type=int)
        if not exact:
            sp.add_argument("--m", type=int)

    sp = sub.add_parser("spectrum", parents=[common], help="Fourier-side sums for an angle and observable")
    sp.add_argument("--angle")
    sp.add_argument("--series")
    sp.add_argument("--cutoff", type=int)

    for name in ("tail", "exact"):
        sp = sub.add_parser(name, parents=[common], help="tail probability of S_n / n^s")
        walk_args(sp, exact=name == "exact")
        sp.add_argument("--s")
        sp.add_argument("--t")
        sp.add_argument("--two-sided", dest="two_sided", action="store_const", const=True)
        sp.add_argument("--inclusive", action="store_const", const=True)
        if name == "tail":
            sp.add_argument("--confidence", type=float)
        else:
            sp.add_argument("--M", type=int, help="quadrature points in x")
            sp.add_argument("--mc", type=int, help="also run Monte Carlo with this many trials")

    sp = sub.add_parser("clt", parents=[common], help="moments and KS distance of S_n / sqrt(n)")
    walk_args(sp)
    sp.add_argument("--sigma", type=float)

    sp = sub.add_parser("construct", parents=[common], help="build a certified counterexample ledger")
    sp.add_argument("--theorem", type=int)
    sp.add_argument("--s")
    sp.add_argument("--depth", type=int)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--toy", dest="faithful", action="store_const", const=False)
    g.add_argument("--faithful", dest="faithful", action="store_const", const=True)
    sp.add_argument("--amplitudes", help="comma separated toy amplitudes a_1,a_2,...")
    sp.add_argument("--n-min", dest="n_min", help="comma separated lower bounds on N_k")
    sp.add_argument("--gamma")
    sp.add_argument("--c")
    sp.add_argument("--angle")
    sp.add_argument("--evidence", type=int, help="Monte Carlo trials per level (0: none)")

    sp = sub.add_parser("verify", parents=[common], help="re-check a ledger file")
    sp.add_argument("ledger", nargs="?")

    sp = sub.add_parser("chain", parents=[common], help="exact mixing check of the q-state chain")
    sp.add_argument("--q", type=int)
    sp.add_argument("--p", type=int)
    sp.add_argument("--horizon", type=int)

    sp = sub.add_parser("preset", parents=[common], help=f"canned experiments: {', '.join(PRESETS)}")
    sp.add_argument("name", nargs="?")
    sp.add_argument("--m", type=int)
    return p


def resolve(args: argparse.Namespace) -> dict:
    """Defaults, then the ``--config`` file, then explicit flags."""
    cfg = dict(COMMON)
    cfg.update(DEFAULTS[args.command])
    if args.config:
        d = _load_json(args.config)
        if "config" in d and isinstance(d["config"], dict):
            d = d["config"]
        unknown = set(d) - set(cfg) - {"command"}
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update({k: v for k, v in d.items() if k != "command"})
    cfg.update({k: v for k, v in vars(args).items() if v is not None and k != "config"})
    cfg["command"] = args.command
    cfg["config"] = args.config
    if cfg["command"] == "verify" and not cfg.get("ledger"):
        raise UsageError("verify needs a ledger file")
    if cfg["command"] == "preset" and not cfg.get("name"):
        raise UsageError(f"preset needs a name; available: {', '.join(PRESETS)}")
    return cfg


COMMANDS = {"spectrum": cmd_spectrum, "tail": cmd_tail, "clt": cmd_clt, "exact": cmd_exact,
            "construct": cmd_construct, "verify": cmd_verify, "chain": cmd_chain, "preset": cmd_preset}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage().strip())
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_USAGE
    except ResonanceError as e:
        print(f"resonance: {e}", file=sys.stderr)
        return EXIT_MATH
    except C.Infeasible as e:
        print(f"infeasible ({e.inequality or 'construction'}): {e}", file=sys.stderr)
        return EXIT_MATH
    except C.ConstructionError as e:
        print(f"construction failed: {e}", file=sys.stderr)
        return EXIT_MATH
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
