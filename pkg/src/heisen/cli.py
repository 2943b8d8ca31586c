"""heisen verify|kernel|evolve|probe|algebra [--config PATH] [--out DIR] [--seed N]

Exit codes: 0 success, 1 a check failed, 2 bad config, unknown symbol or
unparseable expression.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import algebra as A
from . import multipliers as M
from . import probes as P
from . import suites
from .biradial import BiradialInput, analyze, dump_csv, plancherel_norm, synthesize
from .config import ConfigError, load_config
from .group import MultiIndex

OK, FAIL, BAD = 0, 1, 2


def write_atomic(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=False, default=_jsonable) + "\n"


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    raise TypeError(f"not serializable: {type(v)}")


def _clean(x):
    """JSON has no infinity; report it as the string "inf"."""
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


# ----------------------------------------------------------------- verify

def cmd_verify(cfg, out):
    seed = cfg.seed
    jobs = cfg.get("run", "jobs")
    todo = list(suites.default_suites(seed))
    try:
        phi = M.parse_symbol(cfg.get("symbol", "symbol"))
    except M.SymbolError as e:
        print(f"error: {e}", file=sys.stderr)
        return BAD
    grid = cfg.grid()
    tol = cfg.get("tolerances", "tail_tol")
    todo.append(("biradial.kernel_tail", lambda: suites.kernel_tail(grid, phi, tol)))

    def run(item):
        name, fn = item
        try:
            rep = fn()
        except Exception as e:           # a crashing suite is a failing suite
            rep = P.ProbeReport(name)
            rep.add("exception", 1.0, 0.0)
            rep.data["error"] = f"{type(e).__name__}: {e}"
        rep.name = name
        return rep

    with ThreadPoolExecutor(max_workers=jobs) as ex:
        reports = list(ex.map(run, todo))
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}")
        if not r.passed:
            for m in r.metrics:
                if not m["pass"]:
                    print(f"      {m['key']} = {m['value']:.3e} (tolerance {m['tolerance']})")
            if "error" in r.data:
                print(f"      {r.data['error']}")
    passed = all(r.passed for r in reports)
    write_atomic(os.path.join(out, "verify.json"),
                 _json({"seed": seed, "suites": [r.to_dict() for r in reports], "pass": passed}))
    print(f"{sum(r.passed for r in reports)}/{len(reports)} suites passed")
    return OK if passed else FAIL


# ----------------------------------------------------------------- kernel

PROFILE_HEADER = ["rho", "s", "re", "im"]


def cmd_kernel(cfg, out):
    try:
        phi = M.parse_symbol(cfg.get("symbol", "symbol"))
    except M.SymbolError as e:
        print(f"error: {e}", file=sys.stderr)
        return BAD
    grid = cfg.grid()
    kc = cfg.values["kernel"]
    K = M.kernel_coeffs(phi, grid, K=1, extra=0)
    rho = np.linspace(0.0, kc["rho_max"], kc["n_rho"])
    s = np.linspace(-kc["s_max"], kc["s_max"], kc["n_s"])
    R, S = np.meshgrid(rho, s, indexing="ij")
    vals = synthesize(K, R, S)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PROFILE_HEADER)
    for i in range(len(rho)):
        for j in range(len(s)):
            v = vals[i, j]
            w.writerow([repr(float(rho[i])), repr(float(s[j])), repr(float(v.real)), repr(float(v.imag))])
    write_atomic(os.path.join(out, "kernel_profile.csv"), buf.getvalue())
    write_atomic(os.path.join(out, "kernel_coefficients.csv"), dump_csv(K))
    norm, flag = M.l2_kernel_norm(phi, grid.d)
    tail = M.kernel_tail_mass(phi, grid)
    write_atomic(os.path.join(out, "kernel.json"),
                 _json({"symbol": phi.label, "l2_norm": _clean(norm), "admissible": flag,
                        "tail_fraction": _clean(tail)}))
    print(f"symbol: {phi.label}")
    print(f"l2_norm = {norm!r}")
    print(f"admissible = {str(flag).lower()}")
    if tail > cfg.get("tolerances", "tail_tol"):
        print(f"warning: the grid misses {tail:.2e} of the kernel's L² mass; "
              "the profile is a truncated series")
    return OK


# ----------------------------------------------------------------- evolve

def _initial(cfg):
    grid = cfg.grid()
    if cfg.get("evolve", "initial") == "random":
        return P.random_field(grid, np.random.default_rng(cfg.seed))
    return analyze(BiradialInput(fhat=suites.odd_gaussian_fhat, rate=0.25), grid)


def cmd_evolve(cfg, out):
    nu = cfg.get("evolve", "nu")
    ts = cfg.get("evolve", "t_list")
    if any(t < 0 for t in ts):
        raise ConfigError("t_list entries must be >= 0")
    u0 = _initial(cfg)
    n0 = plancherel_norm(u0)
    write_atomic(os.path.join(out, "input.csv"), dump_csv(u0))
    log = io.StringIO()
    w = csv.writer(log, lineterminator="\n")
    w.writerow(["t", "norm", "ratio"])
    worst = 0.0
    for k, t in enumerate(ts):
        u = P.evolve(u0, t, nu)
        write_atomic(os.path.join(out, f"evolve_{k:03d}.csv"), dump_csv(u))
        nt = plancherel_norm(u)
        ratio = nt / n0 if n0 else 1.0
        worst = max(worst, abs(ratio - 1))
        w.writerow([repr(float(t)), repr(nt), repr(ratio)])
    write_atomic(os.path.join(out, "conservation.csv"), log.getvalue())
    print(f"evolved {len(ts)} time(s); max |ratio - 1| = {worst:.3e}")
    return OK if worst <= 1e-12 else FAIL


# ------------------------------------------------------------------ probe

def _word(text, d):
    ids = tuple(int(v) for v in text.replace(" ", "").split(",") if v)
    return MultiIndex(ids, d)


def cmd_probe(cfg, out):
    pc = cfg.values["probe"]
    name = pc["probe"]
    rng = np.random.default_rng(cfg.seed)
    if name == "miyachi":
        rep = P.miyachi_probe(pc["nu"], pc["p"], pc["t_list"], m=pc["m"], seed=cfg.seed)
    elif name == "lemma25":
        try:
            I = _word(pc["word"], 1)
        except ValueError as e:
            raise ConfigError(f"bad word: {e}") from None
        rep = P.lemma25_ratio(P.GaussianData(), I)
    elif name == "sobolev":
        rep = P.sobolev_identity_p2(P.random_field(cfg.grid(), rng, damp=False))
    elif name == "lp":
        F = P.random_field(cfg.grid(), rng)
        rep = P.ProbeReport(f"littlewood_paley[N={pc['N']}]")
        ratio = P.lp_norm_p2(F, pc["N"]) / plancherel_norm(F)
        exact = math.sqrt(P.lp_constant(pc["N"]))
        rep.add("ratio", ratio)
        rep.add("relative_error", abs(ratio - exact) / exact, 1e-6)
    elif name == "moment_growth":
        nu, m = pc["nu"], pc["m"]
        fit = M.moment_growth_probe(lambda t: M.schrodinger_high(nu, 4.0 + 4 * nu * m, t), m,
                                    pc["t_list"])
        rep = P.ProbeReport(f"moment_growth[nu={nu:g}, m={m}]")
        rep.add_fit(fit["slope"], fit["r2"], 2 * m + 0.1)
        rep.data["values"] = fit["values"]
    else:
        raise ConfigError(f"unknown probe '{name}' "
                          "(miyachi, lemma25, sobolev, lp, moment_growth)")
    write_atomic(os.path.join(out, "probe.json"), _json(rep.to_dict()))
    print(f"{'PASS' if rep.passed else 'FAIL'}  {rep.name}")
    return OK if rep.passed else FAIL


# ---------------------------------------------------------------- algebra

def cmd_algebra(cfg, out, expr=None):
    text = expr if expr is not None else cfg.get("algebra", "expr")
    d = cfg.get("algebra", "d") or None
    try:
        el = A.parse_expression(text, d)
    except A.ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return BAD
    print(A.format_element(el))
    ok = A.delta_commutator_check(el.d) and A.delta_power_identities(2, el.d)
    print(f"identity checks (d={el.d}): {'pass' if ok else 'FAIL'}")
    return OK if ok else FAIL


# ------------------------------------------------------------------- main

def build_parser():
    p = argparse.ArgumentParser(prog="heisen", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=["verify", "kernel", "evolve", "probe", "algebra"])
    p.add_argument("expr", nargs="?", help="expression for the algebra command")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=None)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("seed must be >= 0")
            cfg.set("run", "seed", args.seed)
        out = args.out or cfg.get("run", "out")
        if args.command == "algebra":
            return cmd_algebra(cfg, out, args.expr)
        if args.expr is not None:
            raise ConfigError(f"unexpected argument {args.expr!r}")
        return {"verify": cmd_verify, "kernel": cmd_kernel, "evolve": cmd_evolve,
                "probe": cmd_probe}[args.command](cfg, out)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return BAD


if __name__ == "__main__":
    sys.exit(main())
