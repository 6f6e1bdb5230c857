"""Command-line experiment runner.

Exit codes: 0 success, 1 verification mismatch, 2 configuration error,
3 resource error (qubit cap).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import poly as P
from .circuit import (
    Design,
    assemble_grover,
    conventional_cnots_from_census,
    cost_report,
    lower_dictionary,
    proposed_cnots_from_census,
)
from .gas import (
    Backend,
    GasConfig,
    ObjectiveTable,
    run_trials,
    exhaustive_search,
)
from .problems import (
    MimoInstance,
    SyndromeInstance,
    builtin_matrices,
    fixed_instance,
    mimo_objective,
    random_instance,
    syndrome_objective,
    term_census_binary,
    term_census_spin,
)
from .sim import ResourceLimitError, measure_distribution, run, to_signed

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def git_blob_hash(data: bytes) -> str:
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


@dataclass
class Problem:
    name: str
    binary: P.Polynomial
    spin: P.Polynomial
    include_constant: bool
    details: dict

    def objective(self, design: Design) -> P.Polynomial:
        return self.binary if design is Design.CONVENTIONAL else self.spin


TOY = {(0, 1): 2, (2,): 1, (): -1}


def load_problem(args) -> Problem:
    kind = args.problem
    if kind == "syndrome":
        mats = builtin_matrices()
        if args.matrix in mats:
            inst = SyndromeInstance(mats[args.matrix])
        else:
            inst = SyndromeInstance.from_json(Path(args.matrix).read_text())
        if args.syndrome:
            inst = SyndromeInstance(inst.H_p, np.array([int(b) for b in args.syndrome]), inst.w)
        return Problem(
            f"syndrome:{args.matrix}",
            syndrome_objective(inst, "binary"),
            syndrome_objective(inst, "spin"),
            True,
            {"H_p": inst.H_p.tolist(), "y": inst.y.tolist(), "w": int(inst.w)},
        )
    if kind == "mimo":
        inst = _mimo_instance(args)
        return Problem(
            f"mimo:M={inst.M},N_t={inst.N_t},N_r={inst.N_r}",
            mimo_objective(inst, "binary"),
            mimo_objective(inst, "spin"),
            False,
            json.loads(inst.to_json()),
        )
    if kind == "toy":
        return Problem(
            "toy",
            P.Polynomial.from_terms("binary", 3, TOY),
            P.Polynomial.from_terms("spin", 3, TOY),
            True,
            {},
        )
    if kind == "file":
        if not args.objective:
            raise ConfigError("--problem file needs --objective PATH")
        p = P.load(args.objective)
        return Problem(f"file:{args.objective}", P.convert(p, "binary"), P.convert(p, "spin"), True, {})
    raise ConfigError(f"unknown problem {kind!r}")


def _mimo_instance(args) -> MimoInstance:
    src = args.instance
    if src == "fixed":
        if (args.M, args.nt, args.nr) != (2, 2, 2):
            raise ConfigError("the fixed instance is 2x2 16-QAM (M=2, N_t=N_r=2)")
        return fixed_instance(args.noise_seed)
    if src == "random":
        return random_instance(args.nt, args.nr, args.M, args.sigma, np.random.default_rng(args.noise_seed))
    return MimoInstance.from_json(Path(src).read_text())


# -- formatting -------------------------------------------------------------


def _census_str(counts) -> str:
    return " ".join(f"{k}:{v}" for k, v in sorted(counts.items()))


def _table(rows: list[list], header: list[str]) -> str:
    cols = [header] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cols) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cols)


# -- commands ---------------------------------------------------------------


def cmd_count_terms(args, out=None) -> int:
    out = out or sys.stdout
    prob = load_problem(args)
    rows = []
    for design in Design:
        census = P.degree_census(prob.objective(design), include_constant=prob.include_constant)
        rows.append([design.value, census.total, _census_str(census.counts)])
    print(f"problem: {prob.name}", file=out)
    print(_table(rows, ["design", "terms", "census(degree:count)"]), file=out)
    return EXIT_OK


def _sweep_rows(args) -> list[list]:
    rows = []
    for M in range(1, args.sweep_M + 1):
        cb = term_census_binary(M, args.nt)
        cs = term_census_spin(M, args.nt)
        rows.append([M, conventional_cnots_from_census(cb), proposed_cnots_from_census(cs)])
    return rows


def cmd_count_gates(args, out=None) -> int:
    out = out or sys.stdout
    if args.problem == "mimo" and args.sweep_M:
        rows = _sweep_rows(args)
        print(f"mimo closed-form sweep, N_t={args.nt}; CNOTs per value qubit (IQFT excluded)", file=out)
        print(_table(rows, ["M", "conventional", "proposed"]), file=out)
        if args.out:
            _write_csv(Path(args.out) / "cnot_sweep.csv", ["M", "conventional", "proposed"], rows, None)
        return EXIT_OK
    prob = load_problem(args)
    m = args.m or 1
    rows = []
    for design in Design:
        rep = cost_report(prob.objective(design), design, m)
        rows.append(
            [
                design.value,
                rep.cnot_total_per_value_qubit,
                rep.rz_total_per_value_qubit,
                rep.cnot_total,
                _census_str({k: c for k, (_, c) in rep.per_degree.items() if k}),
            ]
        )
    print(f"problem: {prob.name}  (m={m}; IQFT excluded)", file=out)
    print(
        _table(rows, ["design", "cnot/value-qubit", "rz/value-qubit", "cnot_total", "cnot by degree"]),
        file=out,
    )
    return EXIT_OK


def _verify(p: P.Polynomial, design: Design, m: int, tol: float = 1e-9) -> tuple[bool, list[list]]:
    dist = measure_distribution(run(lower_dictionary(p, m, design)), p.n, m)
    values = P.evaluate_all(p)
    ok = True
    rows = []
    for key in range(1 << p.n):
        col = dist.probs[:, key]
        measured = int(np.argmax(col))
        expected = values[key]
        exact = float(expected).is_integer()
        want = int(expected) % (1 << m) if exact else None
        good = exact and measured == want and abs(col[measured] - 1.0 / (1 << p.n)) <= tol
        ok &= good
        rows.append(
            [
                P.bitstring(key, p.n),
                f"{expected:g}",
                to_signed(measured, m),
                f"{col[measured]:.6f}",
                "ok" if good else "MISMATCH",
            ]
        )
    return ok, rows


def cmd_verify_dictionary(args, out=None) -> int:
    out = out or sys.stdout
    prob = load_problem(args)
    design = Design(args.design)
    p = prob.objective(design)
    m = args.m or P.value_bits_required(p)
    ok, rows = _verify(p, design, m)
    print(f"problem: {prob.name}  design={design.value}  (n, m)=({p.n}, {m})", file=out)
    print(_table(rows, ["key", "E(key)", "decoded", "probability", "status"]), file=out)
    print("PASS" if ok else "FAIL", file=out)
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_dump_circuit(args, out=None) -> int:
    out = out or sys.stdout
    prob = load_problem(args)
    design = Design(args.design)
    p = prob.objective(design)
    if args.threshold is not None:
        p = p.add_constant(-args.threshold)
    m = args.m or P.value_bits_required(p)
    circ = lower_dictionary(p, m, design)
    if args.grover:
        circ = assemble_grover(circ)
    text = circ.dump()
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_exhaustive(args, out=None) -> int:
    out = out or sys.stdout
    prob = load_problem(args)
    p = prob.objective(Design(args.design))
    bits, value, evals = exhaustive_search(p)
    print(f"problem: {prob.name}", file=out)
    print(f"minimiser: {''.join(map(str, bits))}", file=out)
    print(f"value: {value!r}", file=out)
    print(f"evaluations: {evals}", file=out)
    return EXIT_OK


# -- gas experiment ---------------------------------------------------------


def _write_csv(path: Path, header: list[str], rows, manifest_name: str | None) -> None:
    lines = []
    if manifest_name:
        lines.append(f"# manifest={manifest_name}")
    lines.append(",".join(header))
    for r in rows:
        lines.append(",".join(_fmt(v) for v in r))
    path.write_text("\n".join(lines) + "\n")


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, np.floating):
        return repr(float(v))
    return str(v)


def _step_curve(traces, grid_max: int, axis: str) -> list[list]:
    """Mean best-so-far and mean last-measured value against QD or CD."""
    T = len(traces)
    best = np.empty((T, grid_max + 1))
    meas = np.empty((T, grid_max + 1))
    for i, tr in enumerate(traces):
        xs = np.array([getattr(r, axis) for r in tr.records], dtype=np.int64)
        bv = np.array([r.best_value for r in tr.records])
        mv = np.array([r.value for r in tr.records])
        grid = np.arange(grid_max + 1)
        pos = np.searchsorted(xs, grid, side="right") - 1
        best[i] = np.where(pos >= 0, bv[np.maximum(pos, 0)], tr.y0)
        meas[i] = np.where(pos >= 0, mv[np.maximum(pos, 0)], tr.y0)
    return [[q, float(best[:, q].mean()), float(meas[:, q].mean())] for q in range(grid_max + 1)]


def _cdf_rows(samples: list[int | None], total: int) -> list[list]:
    reached = sorted(s for s in samples if s is not None)
    rows = []
    for j, q in enumerate(reached):
        if j + 1 < len(reached) and reached[j + 1] == q:
            continue
        rows.append([q, (j + 1) / total])
    return rows


def cmd_gas(args, out=None) -> int:
    out = out or sys.stdout
    prob = load_problem(args)
    design = Design(args.design)
    p = prob.objective(design)
    cfg = GasConfig(
        max_queries=args.max_queries,
        max_iterations=args.max_iters,
        seed=args.seed,
        backend=Backend(args.backend),
        m=args.m,
        design=design,
        value_scale=args.value_scale,
    )
    if args.trials <= 0:
        raise ConfigError("--trials must be positive")
    outdir = Path(args.out or "gas_out")
    outdir.mkdir(parents=True, exist_ok=True)

    table = ObjectiveTable(p)
    optimum = table.minimum
    traces = run_trials(p, cfg, args.trials, workers=args.workers)

    manifest_name = "manifest.json"
    trace_rows = []
    for t, tr in enumerate(traces):
        for r in tr.records:
            trace_rows.append([t, r.c, r.y_c, r.L_c, r.d, r.cum_qd, r.cum_cd, r.best_value])
    _write_csv(
        outdir / "traces.csv",
        ["trial", "iter", "y_c", "L_c", "d", "cum_qd", "cum_cd", "best_value"],
        trace_rows,
        manifest_name,
    )

    qd_max = max(tr.total_queries for tr in traces)
    cd_max = max(tr.total_measurements for tr in traces)
    _write_csv(outdir / "convergence_qd.csv", ["queries", "mean_best", "mean_measured"],
               _step_curve(traces, qd_max, "cum_qd"), manifest_name)
    _write_csv(outdir / "convergence_cd.csv", ["measurements", "mean_best", "mean_measured"],
               _step_curve(traces, cd_max, "cum_cd"), manifest_name)

    q_hits = [tr.queries_to(optimum) for tr in traces]
    c_hits = [tr.measurements_to(optimum) for tr in traces]
    _write_csv(outdir / "cdf_queries.csv", ["queries", "cdf"], _cdf_rows(q_hits, len(traces)), manifest_name)
    _write_csv(outdir / "cdf_measurements.csv", ["measurements", "cdf"],
               _cdf_rows(c_hits, len(traces)), manifest_name)

    # classical baseline: objective evaluations in random order
    evals = []
    best_curves = np.empty((args.trials, table.N))
    for t in range(args.trials):
        rng = np.random.default_rng([args.seed, t, 1])
        perm = rng.permutation(table.N)
        best_curves[t] = np.minimum.accumulate(table.values[perm])
        evals.append(int(np.flatnonzero(best_curves[t] <= optimum + 1e-9)[0]) + 1)
    _write_csv(outdir / "baseline_cdf.csv", ["evaluations", "cdf"], _cdf_rows(evals, args.trials), manifest_name)
    _write_csv(outdir / "baseline_convergence.csv", ["evaluations", "mean_best"],
               [[e + 1, float(best_curves[:, e].mean())] for e in range(table.N)], manifest_name)

    outputs = sorted(f.name for f in outdir.glob("*.csv"))
    manifest = {
        "command": "gas",
        "config": {
            "problem": prob.name,
            "design": design.value,
            "backend": cfg.backend.value,
            "lambda": cfg.lam,
            "max_queries": cfg.max_queries,
            "max_iterations": cfg.max_iterations,
            "m": cfg.m,
            "value_scale": cfg.value_scale,
            "workers": args.workers,
        },
        "master_seed": args.seed,
        "trials": args.trials,
        "input_hash": git_blob_hash(P.to_string(p).encode()),
        "instance": prob.details,
        "optimum": optimum,
        "outputs": outputs,
    }
    (outdir / manifest_name).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    reached = sum(q is not None for q in q_hits)
    mean_q = float(np.mean([q for q in q_hits if q is not None])) if reached else math.nan
    print(f"problem: {prob.name}  design={design.value}  backend={cfg.backend.value}", file=out)
    print(f"optimum {optimum!r}; reached in {reached}/{len(traces)} trials; mean queries {mean_q:.2f}", file=out)
    print(f"wrote {', '.join(outputs)} and {manifest_name} to {outdir}", file=out)
    return EXIT_OK


# -- argument parsing -------------------------------------------------------


def _add_problem_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--problem", choices=["mimo", "syndrome", "file", "toy"], default="syndrome")
    sp.add_argument("--matrix", default="hamming84", help="hamming74, hamming84 or a JSON instance file")
    sp.add_argument("--syndrome", default=None, help="syndrome bits, e.g. 0010")
    sp.add_argument("--objective", default=None, help="polynomial text file for --problem file")
    sp.add_argument("--instance", default="fixed", help="MIMO instance: fixed, random or a JSON file")
    sp.add_argument("--M", type=int, default=2, help="QAM order parameter (2^(2M)-QAM)")
    sp.add_argument("--nt", type=int, default=2)
    sp.add_argument("--nr", type=int, default=2)
    sp.add_argument("--sigma", type=float, default=0.1)
    sp.add_argument("--noise-seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spingas", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("count-terms", help="term counts for both formulations")
    _add_problem_args(sp)
    sp.set_defaults(func=cmd_count_terms)

    sp = sub.add_parser("count-gates", help="CNOT counts per value qubit for both designs")
    _add_problem_args(sp)
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--sweep-M", type=int, default=0, help="MIMO: closed-form sweep over M = 1..N")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_count_gates)

    sp = sub.add_parser("gas", help="run seeded GAS trials and write CSV data")
    _add_problem_args(sp)
    sp.add_argument("--design", choices=[d.value for d in Design], default="proposed")
    sp.add_argument("--backend", choices=[b.value for b in Backend], default="ideal")
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--value-scale", type=float, default=1.0,
                    help="statevector backend: encode scale*(E-y); use >1 for real coefficients")
    sp.add_argument("--max-queries", type=int, default=1000)
    sp.add_argument("--max-iters", type=int, default=100_000)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_gas)

    sp = sub.add_parser("verify-dictionary", help="simulate A|0> and check every encoded value")
    _add_problem_args(sp)
    sp.add_argument("--design", choices=[d.value for d in Design], default="conventional")
    sp.add_argument("--m", type=int, default=None)
    sp.set_defaults(func=cmd_verify_dictionary)

    sp = sub.add_parser("dump-circuit", help="print the lowered dictionary circuit")
    _add_problem_args(sp)
    sp.add_argument("--design", choices=[d.value for d in Design], default="proposed")
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--threshold", type=float, default=None, help="fold -y into the constant term")
    sp.add_argument("--grover", action="store_true", help="dump one Grover iterate instead")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_dump_circuit)

    sp = sub.add_parser("exhaustive", help="classical exhaustive minimisation")
    _add_problem_args(sp)
    sp.add_argument("--design", choices=[d.value for d in Design], default="conventional")
    sp.set_defaults(func=cmd_exhaustive)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValueError, OSError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
