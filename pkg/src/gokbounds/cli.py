"""Command-line interface.

Subcommands
-----------
bounds    prefactor table for a (w, E) pair, or the lowest upper bound
          attained by a named optimal weight vector (--w-optimal)
weights   optimal weight vectors, closed form with an optional grid check
sample    random-conjugation scatter experiment (records as CSV, envelope
          as JSON) with an optional in-regime bound check
vqe       ensemble optimization demo; writes per-iteration trace CSVs
polytope  constrained extrema on the permutohedron slice, brute-force
          oracle comparison, rearrangement minimum, cycle inequalities
check     re-validate a scatter CSV against the bound prefactors

Vectors are comma-separated numbers inline, or @path to read a file.
Exit codes: 0 success, 2 validation failure, 3 numerical-regime failure,
4 I/O failure.  All floats print with 12 significant digits.
"""

from __future__ import annotations

import argparse
import json
import re
import sys

import numpy as np

from .bounds import (
    bound_set,
    eigenenergy_prefactors,
    eigenenergy_sum_prefactors,
    eigenstate_prefactor,
    eigenstate_sum_prefactors,
    gap_functions,
)
from .core import as_energy_spectrum, as_weight_vector
from .errors import RegimeError, ValidationError
from .polytope import (
    Permutation,
    brute_force_extrema,
    constrained_extrema,
    constraint_slice,
    cycle_bound_check,
    gok_minimum_check,
)
from .sampler import check_error_table, scatter_experiment
from .vqe import REFERENCE_MODEL, IsingModel, run_demo
from .weights import (
    grid_search_optimal,
    optimal_weights_all_energies,
    optimal_weights_all_states,
    optimal_weights_lowest_K_energies,
    optimal_weights_lowest_K_states,
    optimal_weights_single_energy,
    optimal_weights_single_state,
)

_TARGETS = ("E_k", "sumE_all", "sumE_K", "Psi_k", "sumPsi_all", "sumPsi_K")

# let values like "-1,0,2" pass as arguments instead of being read as flags
_NEGATIVE_VECTOR = re.compile(r"^-[0-9.]")


def _vector(text):
    """Parse an inline comma-separated vector or @path file reference."""
    if text.startswith("@"):
        with open(text[1:]) as f:
            raw = f.read()
        parts = raw.replace(",", " ").split()
    else:
        parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("empty vector")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated numbers, got %r" % text)


def _fmt(x) -> str:
    if x is None:
        return ""
    return "%.12g" % float(x)


def _sig(x) -> float:
    return float("%.12g" % float(x))


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        return _sig(obj) if np.isfinite(obj) else str(float(obj))
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    return obj


def _header(args) -> str:
    return "# schema_version=1 seed=%d" % args.seed


def _emit(args, json_obj, csv_lines) -> int:
    if args.format == "json":
        text = json.dumps(_jsonify(json_obj), indent=2) + "\n"
    else:
        text = "\n".join(csv_lines) + "\n"
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as f:
            f.write(text)
    return 0


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValidationError(message)


def _optimal_weights(target, D=None, K=None, k=None, E=None):
    """Dispatch a target name to its closed-form generator."""
    _require(target in _TARGETS, "unknown target %r" % (target,))
    ev = as_energy_spectrum(E) if E is not None else None
    if ev is not None:
        if D is not None and D != ev.dim:
            raise ValidationError("--D disagrees with the length of --E")
        D = ev.dim
    if target == "E_k":
        _require(k is not None, "target E_k needs --k")
        _require(D is not None, "target E_k needs --D or --E")
        return optimal_weights_single_energy(k, D)
    if target == "sumE_all":
        _require(D is not None, "target sumE_all needs --D or --E")
        return optimal_weights_all_energies(D)
    if target == "sumE_K":
        _require(K is not None, "target sumE_K needs --K")
        _require(D is not None, "target sumE_K needs --D or --E")
        return optimal_weights_lowest_K_energies(K, D)
    _require(ev is not None, "target %s needs --E (spectrum-dependent)" % target)
    if target == "Psi_k":
        _require(k is not None, "target Psi_k needs --k")
        return optimal_weights_single_state(k, ev)
    if target == "sumPsi_all":
        return optimal_weights_all_states(ev)
    _require(K is not None, "target sumPsi_K needs --K")
    return optimal_weights_lowest_K_states(K, ev)


def _wcols(D: int) -> str:
    return ",".join("w_%d" % i for i in range(D))


def cmd_bounds(args) -> int:
    if args.w_optimal is not None:
        return _bounds_optimal(args)
    _require(args.w is not None and args.E is not None,
             "bounds needs --w and --E, or --w-optimal")
    wv = as_weight_vector(args.w)
    ev = as_energy_spectrum(args.E)
    bs = bound_set(wv, ev)
    refusals = {}
    for k in range(bs.dim):
        if bs.b_plus[k] is None:
            try:
                eigenstate_prefactor(k, wv, ev)
            except ValidationError as e:
                refusals["b_plus_%d" % k] = str(e)
        if bs.c_plus[k] is None:
            try:
                eigenenergy_prefactors(k, wv)
            except ValidationError as e:
                refusals["c_%d" % k] = str(e)
    obj = {
        "schema_version": 1,
        "seed": args.seed,
        "shape": bs.shape.value,
        "D": bs.dim,
        "K": bs.K,
        "g": bs.validity_g,
        "G": bs.gap_G,
        "w": wv.weights,
        "E": ev.values,
        "a_minus": bs.a_minus,
        "a_plus": bs.a_plus,
        "b_plus": list(bs.b_plus),
        "sum_psi_lower": bs.sum_psi_lower,
        "sum_psi_upper": bs.sum_psi_upper,
        "c_minus": list(bs.c_minus),
        "c_plus": list(bs.c_plus),
        "sum_E_lower": bs.sum_E_lower,
        "sum_E_upper": bs.sum_E_upper,
        "refusals": refusals,
    }
    gG = "%s,%s" % (_fmt(bs.validity_g), _fmt(bs.gap_G))
    lines = [_header(args), "quantity,lower_prefactor,upper_prefactor,g,G"]
    lines.append("ensemble_state,%s,%s,%s" % (_fmt(bs.a_minus), _fmt(bs.a_plus), gG))
    for k in range(bs.dim):
        lo = _fmt(0.0) if bs.b_plus[k] is not None else ""
        lines.append("eigenstate_%d,%s,%s,%s" % (k, lo, _fmt(bs.b_plus[k]), gG))
    lines.append("eigenstate_sum,%s,%s,%s" % (_fmt(bs.sum_psi_lower), _fmt(bs.sum_psi_upper), gG))
    for k in range(bs.dim):
        lines.append("eigenenergy_%d,%s,%s,%s" % (k, _fmt(bs.c_minus[k]), _fmt(bs.c_plus[k]), gG))
    lines.append("eigenenergy_sum,%s,%s,%s" % (_fmt(bs.sum_E_lower), _fmt(bs.sum_E_upper), gG))
    return _emit(args, obj, lines)


def _bounds_optimal(args) -> int:
    target = args.w_optimal
    wv = _optimal_weights(target, D=args.D, K=args.K, k=args.k, E=args.E)
    ev = as_energy_spectrum(args.E) if args.E is not None else None
    if target == "E_k":
        bound = eigenenergy_prefactors(args.k, wv)[1]
    elif target in ("sumE_all", "sumE_K"):
        bound = eigenenergy_sum_prefactors(wv)[1]
    elif target == "Psi_k":
        bound = eigenstate_prefactor(args.k, wv, ev)
    else:
        bound = eigenstate_sum_prefactors(wv, ev)[1]
    obj = {
        "schema_version": 1,
        "seed": args.seed,
        "target": target,
        "D": wv.dim,
        "k": args.k,
        "K": args.K,
        "w": wv.weights,
        "bound": bound,
    }
    if ev is not None:
        gf = gap_functions(wv, ev)
        obj["g"], obj["G"] = gf.g, gf.G
    lines = [
        _header(args),
        "target,bound," + _wcols(wv.dim),
        "%s,%s,%s" % (target, _fmt(bound), ",".join(_fmt(x) for x in wv.weights)),
    ]
    return _emit(args, obj, lines)


def cmd_weights(args) -> int:
    wv = _optimal_weights(args.target, D=args.D, K=args.K, k=args.k, E=args.E)
    obj = {
        "schema_version": 1,
        "seed": args.seed,
        "target": args.target,
        "w": wv.weights,
    }
    lines = [_header(args), "target,source," + _wcols(wv.dim)]
    lines.append("%s,closed_form,%s" % (args.target, ",".join(_fmt(x) for x in wv.weights)))
    code = 0
    if args.verify:
        gw, gbound = grid_search_optimal(
            args.target, wv.dim, K=args.K, k=args.k, E=args.E,
            resolution=args.resolution,
        )
        diff = float(np.max(np.abs(gw.weights - wv.weights)))
        agrees = diff <= args.resolution * wv.dim + 1e-12
        obj["verify"] = {
            "grid_w": gw.weights,
            "grid_bound": gbound,
            "max_abs_diff": diff,
            "resolution": args.resolution,
            "agrees": agrees,
        }
        lines.append("%s,grid,%s" % (args.target, ",".join(_fmt(x) for x in gw.weights)))
        if not agrees:
            print("error: grid optimum differs from the closed form by %.3g"
                  % diff, file=sys.stderr)
            code = 3
    ret = _emit(args, obj, lines)
    return code or ret


def cmd_sample(args) -> int:
    _require(args.w is not None and args.E is not None, "sample needs --w and --E")
    result = scatter_experiment(
        args.w, args.E, n_samples=args.n, mode=args.mode, rng_seed=args.seed
    )
    comp = result.compliance(args.slack) if args.check else None
    if args.format == "json":
        obj = {
            "schema_version": 1,
            "seed": args.seed,
            "mode": result.mode,
            "n_records": result.n_records,
            "g": result.g,
            "w": result.w,
            "E": result.E,
            "envelope": result.envelope,
        }
        if comp is not None:
            obj["check"] = comp
        _emit(args, obj, [])
    else:
        if args.out in (None, "-"):
            result.write_csv(sys.stdout)
            if comp is not None:
                sys.stdout.write("# check n_in_regime=%d n_violations=%d\n"
                                 % (comp["n_in_regime"], comp["n_violations"]))
        else:
            with open(args.out, "w") as f:
                result.write_csv(f)
                if comp is not None:
                    f.write("# check n_in_regime=%d n_violations=%d\n"
                            % (comp["n_in_regime"], comp["n_violations"]))
        if args.envelope_out:
            with open(args.envelope_out, "w") as f:
                json.dump(_jsonify({
                    "schema_version": 1,
                    "seed": args.seed,
                    "envelope": result.envelope,
                }), f, indent=2)
    if comp is not None and comp["n_violations"] > 0:
        print("error: %d in-regime records violate the bounds"
              % comp["n_violations"], file=sys.stderr)
        return 3
    return 0


def cmd_vqe(args) -> int:
    if args.paper_model:
        model = REFERENCE_MODEL
    else:
        _require(args.a is not None, "vqe needs --paper-model or --a (with optional --J)")
        J = {}
        for item in args.J or []:
            parts = item.split(",")
            _require(len(parts) == 3, "--J expects i,j,value")
            try:
                J[(int(parts[0]), int(parts[1]))] = float(parts[2])
            except ValueError:
                raise ValidationError("--J expects integer indices and a numeric value")
        model = IsingModel(N=len(args.a), a=tuple(args.a), J=J)
    out_dir = args.out if args.out not in (None, "-") else "."
    results = run_demo(
        model=model,
        weight_mode=args.weights_exp,
        out_path=out_dir,
        max_iter=args.max_iter,
        seed=args.seed,
    )
    first = next(iter(results.values()))["result"]
    runs = []
    for n in sorted(results):
        tr = results[n]["result"]
        runs.append({
            "exponent": n,
            "converged": tr.converged,
            "iterations": tr.points[-1].iteration,
            "final_delta_E_w": tr.points[-1].bundle.delta_E_w,
            "trace_csv": results[n]["trace"],
            "bounds_csv": results[n]["bounds"],
        })
    if args.format == "json":
        obj = {
            "schema_version": 1,
            "seed": args.seed,
            "spectrum": first.spectrum.values,
            "runs": runs,
        }
        sys.stdout.write(json.dumps(_jsonify(obj), indent=2) + "\n")
    else:
        lines = [_header(args),
                 "exponent,converged,iterations,final_delta_E_w,trace_csv,bounds_csv"]
        for r in runs:
            lines.append("%d,%s,%d,%s,%s,%s" % (
                r["exponent"], r["converged"], r["iterations"],
                _fmt(r["final_delta_E_w"]), r["trace_csv"], r["bounds_csv"],
            ))
        sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _polytope_target(text):
    if "," in text:
        return [float(p) for p in text.split(",") if p.strip()]
    return text


def cmd_polytope(args) -> int:
    _require(args.w is not None and args.E is not None, "polytope needs --w and --E")
    if args.gok_min:
        val = gok_minimum_check(args.w, args.E)
        dot = float(np.dot(args.w, args.E))
        obj = {
            "schema_version": 1,
            "seed": args.seed,
            "min_over_rearrangements": val,
            "identity_pairing": dot,
            "identity_is_minimum": bool(dot <= val + 1e-12),
        }
        lines = [_header(args),
                 "min_over_rearrangements,identity_pairing,identity_is_minimum",
                 "%s,%s,%s" % (_fmt(val), _fmt(dot), obj["identity_is_minimum"])]
        return _emit(args, obj, lines)
    if args.cycle is not None:
        try:
            cyc = tuple(int(p) for p in args.cycle.split(","))
        except ValueError:
            raise ValidationError("--cycle expects comma-separated indices")
        perm = Permutation.from_cycle(cyc, len(args.w))
        rep = cycle_bound_check(perm, args.w, args.E)
        obj = {
            "schema_version": 1,
            "seed": args.seed,
            "cycle": list(cyc),
            "delta_E_w": rep.delta_E_w,
            "L": rep.L,
            "L_prime": rep.L_prime,
            "delta1": rep.delta1,
            "delta2": rep.delta2,
            "lower_bound": rep.lower_bound,
            "upper_bound": rep.upper_bound,
            "satisfied": rep.satisfied,
        }
        lines = [_header(args),
                 "delta_E_w,L,L_prime,delta1,delta2,lower_bound,upper_bound,satisfied",
                 "%s,%d,%d,%s,%s,%s,%s,%s" % (
                     _fmt(rep.delta_E_w), rep.L, rep.L_prime, _fmt(rep.delta1),
                     _fmt(rep.delta2), _fmt(rep.lower_bound), _fmt(rep.upper_bound),
                     rep.satisfied)]
        return _emit(args, obj, lines)
    _require(args.target is not None and args.delta is not None,
             "polytope needs --target with --delta (or --gok-min / --cycle)")
    target = _polytope_target(args.target)
    lo, hi = constrained_extrema(target, args.w, args.E, args.delta, base=args.base)
    if isinstance(target, str) and target.startswith("E_"):
        base = "E"
    elif isinstance(target, str):
        base = "w"
    else:
        base = args.base or "w"
    sl = constraint_slice(args.w, args.E, args.delta, base=base)
    obj = {
        "schema_version": 1,
        "seed": args.seed,
        "target": args.target,
        "base": base,
        "delta": args.delta,
        "min": lo,
        "max": hi,
        "slice_vertices": [sv.vertex for sv in sl.intersection_vertices],
    }
    brute_cols = ""
    code = 0
    if args.oracle:
        blo, bhi = brute_force_extrema(target, args.w, args.E, args.delta, base=args.base)
        agrees = bool(max(abs(lo - blo), abs(hi - bhi)) <= 1e-10)
        obj["oracle"] = {"min": blo, "max": bhi, "agrees": agrees}
        brute_cols = ",%s,%s,%s" % (_fmt(blo), _fmt(bhi), agrees)
        if not agrees:
            print("error: brute-force extrema disagree with the analytic slice",
                  file=sys.stderr)
            code = 3
    lines = [_header(args),
             "target,delta,min,max" + (",brute_min,brute_max,agrees" if args.oracle else ""),
             "%s,%s,%s,%s%s" % (args.target, _fmt(args.delta), _fmt(lo), _fmt(hi), brute_cols)]
    ret = _emit(args, obj, lines)
    return code or ret


def cmd_check(args) -> int:
    _require(args.w is not None and args.E is not None, "check needs --w and --E")
    with open(args.csv) as f:
        lines = [ln.strip() for ln in f if ln.strip()]
    rows = [ln for ln in lines if not ln.startswith("#")]
    _require(len(rows) >= 1, "CSV file %r has no header row" % args.csv)
    header = rows[0].split(",")
    col = {name: i for i, name in enumerate(header)}
    D = len(args.w)
    needed = ["delta_E_w", "delta_rho_w", "sum_psi", "sum_abs_E"]
    needed += ["delta_psi_%d" % i for i in range(D)]
    needed += ["delta_E_%d" % i for i in range(D)]
    missing = [c for c in needed if c not in col]
    _require(not missing, "CSV is missing columns: %s" % ", ".join(missing))
    data = [ln.split(",") for ln in rows[1:]]
    def column(name):
        i = col[name]
        return np.array([float(r[i]) for r in data])
    comp = check_error_table(
        args.w, args.E,
        column("delta_E_w"),
        column("delta_rho_w"),
        np.column_stack([column("delta_psi_%d" % i) for i in range(D)]) if data else np.zeros((0, D)),
        np.column_stack([column("delta_E_%d" % i) for i in range(D)]) if data else np.zeros((0, D)),
        column("sum_psi"),
        column("sum_abs_E"),
        slack=args.slack,
    )
    obj = {"schema_version": 1, "seed": args.seed}
    obj.update(comp)
    out_lines = [_header(args),
                 "n_records,n_in_regime,n_violations",
                 "%d,%d,%d" % (comp["n_records"], comp["n_in_regime"], comp["n_violations"])]
    ret = _emit(args, obj, out_lines)
    if comp["n_violations"] > 0:
        print("error: %d in-regime records violate the bounds" % comp["n_violations"],
              file=sys.stderr)
        return 3
    return ret


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="RNG seed, echoed in output headers (default 0)")
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="output format (default csv)")
    common.add_argument("--out", default=None,
                        help="output file (default stdout); for vqe, the "
                             "directory receiving the trace/bounds CSVs")

    parser = argparse.ArgumentParser(
        prog="gokbounds",
        description="Ensemble variational error bounds: prefactors, optimal "
                    "weights, polytope oracles, scatter sampling, and an "
                    "optimization demo.",
    )
    parser._negative_number_matcher = _NEGATIVE_VECTOR
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", parents=[common],
                       help="prefactor table for (w, E) or a named optimal w")
    p.add_argument("--w", type=_vector, help="weight vector (descending, sums to 1)")
    p.add_argument("--E", type=_vector, help="energy spectrum (ascending)")
    p.add_argument("--w-optimal", choices=_TARGETS, default=None,
                   help="derive w from the named optimal generator and print "
                        "its lowest upper bound")
    p.add_argument("--D", type=int, default=None, help="dimension for --w-optimal")
    p.add_argument("--K", type=int, default=None, help="targeted-state count")
    p.add_argument("--k", type=int, default=None, help="state index")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("weights", parents=[common],
                       help="closed-form optimal weight vectors")
    p.add_argument("--target", choices=_TARGETS, required=True)
    p.add_argument("--D", type=int, default=None)
    p.add_argument("--K", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--E", type=_vector, default=None)
    p.add_argument("--verify", action="store_true",
                   help="cross-check against the grid-search oracle")
    p.add_argument("--resolution", type=float, default=1e-3,
                   help="grid resolution for --verify (default 1e-3)")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("sample", parents=[common],
                       help="scatter experiment: random conjugations + "
                            "permutations + Jacobi sweep")
    p.add_argument("--w", type=_vector, required=True)
    p.add_argument("--E", type=_vector, required=True)
    p.add_argument("--n", type=int, default=0,
                   help="random samples on top of the deterministic sets (default 0)")
    p.add_argument("--mode", choices=("orthogonal", "unitary"), default="orthogonal")
    p.add_argument("--check", action="store_true",
                   help="validate every in-regime record against the bounds")
    p.add_argument("--slack", type=float, default=1e-10)
    p.add_argument("--envelope-out", default=None,
                   help="write the envelope summary JSON here (csv format only)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("vqe", parents=[common],
                       help="ensemble optimization demo with error traces")
    p.add_argument("--paper-model", action="store_true",
                   help="use the built-in two-site reference model")
    p.add_argument("--a", type=_vector, default=None,
                   help="transverse-field coefficients (defines N)")
    p.add_argument("--J", action="append", default=None, metavar="i,j,val",
                   help="coupling entry, repeatable")
    p.add_argument("--weights-exp", choices=("1", "2", "3", "all"), default="all",
                   help="weight-vector exponent(s) to run (default all)")
    p.add_argument("--max-iter", type=int, default=5000)
    p.set_defaults(func=cmd_vqe)

    p = sub.add_parser("polytope", parents=[common],
                       help="slice extrema, brute-force oracle, rearrangement "
                            "minimum, cycle inequalities")
    p.add_argument("--w", type=_vector, required=True)
    p.add_argument("--E", type=_vector, required=True)
    p.add_argument("--delta", type=float, default=None,
                   help="constraint plane dE_w = delta")
    p.add_argument("--target", default=None,
                   help="'rho', 'E_<k>', or a coefficient vector")
    p.add_argument("--base", choices=("w", "E"), default=None,
                   help="polytope base for coefficient-vector targets")
    p.add_argument("--oracle", action="store_true",
                   help="compare against exhaustive vertex enumeration")
    p.add_argument("--gok-min", action="store_true",
                   help="minimum of w . (rearranged E) over all rearrangements")
    p.add_argument("--cycle", default=None, metavar="i,j,...",
                   help="check the cycle inequalities for this cycle")
    p.set_defaults(func=cmd_polytope)

    p = sub.add_parser("check", parents=[common],
                       help="re-validate a scatter CSV against the bounds")
    p.add_argument("--csv", required=True, help="scatter CSV written by 'sample'")
    p.add_argument("--w", type=_vector, required=True)
    p.add_argument("--E", type=_vector, required=True)
    p.add_argument("--slack", type=float, default=1e-10)
    p.set_defaults(func=cmd_check)

    for sp in sub.choices.values():
        sp._negative_number_matcher = _NEGATIVE_VECTOR

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return int(args.func(args) or 0)
    except SystemExit as e:
        code = e.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 2
    except ValidationError as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    except RegimeError as e:
        print("error: %s" % e, file=sys.stderr)
        return 3
    except OSError as e:
        print("error: %s" % e, file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
