"""Batch command-line front end.

Every subcommand reads sampled functions in the binary block format,
runs one library operation, and writes a self-describing JSON report
plus any binary artifacts.  Reports embed the resolved configuration
and the library version, floats are printed with 17 significant digits,
and key order is fixed, so identical invocations produce identical
bytes.

Exit codes: 0 success, 1 validation failure, 2 usage or input error.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .blockio import read_block, write_block
from .carleson import cmo_norm, generate_candidates
from .corpus import gen_corpus
from .czd import cz_decompose, support_violations
from .errors import ConfigurationError, FlagLPError
from .filters import FilterProfile, bank_from_config, build_filter_bank
from .grid import SampledFunction, lp_norm, make_grid
from .kernels import (builtin_kernel, convolution_operator_norm,
                      custom_kernel, flag_convolve, project_to_flag,
                      validate_flag_kernel, validate_product_kernel)
from .maximal import MaximalConfig, hl_maximal, strong_maximal
from .squarefuncs import g_flag, hardy_norm
from .transform import (CoefficientField, analyze, estimate_remainder_norm,
                        neumann_inverse, synthesize_discrete)

VERIFY_SUITES = ("partition", "plancherel", "remainder-decay", "roundtrip")


def _format_float(x):
    if x != x:
        return "NaN"
    if x in (float("inf"), float("-inf")):
        return '"%s"' % ("Infinity" if x > 0 else "-Infinity")
    return "%.17g" % x


def dump_json(obj, indent=0):
    """JSON emitter with insertion-ordered keys and %.17g floats."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join("%s%s: %s" % (inner, json.dumps(str(k)),
                                         dump_json(v, indent + 1))
                           for k, v in obj.items())
        return "{\n%s\n%s}" % (items, pad)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ",\n".join(inner + dump_json(v, indent + 1) for v in obj)
        return "[\n%s\n%s]" % (items, pad)
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return dump_json({"re": float(obj.real), "im": float(obj.imag)},
                         indent)
    return json.dumps(str(obj))


def _write_report(path, report):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_json(report))
        fh.write("\n")


def _jobs(args):
    if args.jobs is not None:
        return args.jobs
    env = os.environ.get("FLAGLP_JOBS")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigurationError("FLAGLP_JOBS must be an integer")
    return os.cpu_count() or 1


def _bank_for(grid, args):
    text = args.bank
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh
                     if ln.strip() and not ln.strip().startswith("#")]
        text = ",".join(lines) + ("," + text if text else "")
    if text:
        return bank_from_config(grid, text)
    return build_filter_bank(grid, FilterProfile(), args.offset)


def _report_header(command, args, grid=None, bank=None):
    config = {"jobs": _jobs(args)}
    for key, value in sorted(vars(args).items()):
        # the output directory does not affect results and would break
        # byte-identical reports across runs
        if key in ("func", "jobs", "out"):
            continue
        config[key] = value
    out = {"command": command, "version": __version__, "config": config}
    if grid is not None:
        out["grid"] = {"n": grid.n, "m": grid.m, "L": grid.L}
    if bank is not None:
        out["bank"] = bank.identifier()
    return out


def _load_input(path):
    if not os.path.exists(path):
        raise FileNotFoundError("input block %r does not exist" % (path,))
    return read_block(path)


def _out_dir(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


def cmd_analyze(args):
    f = _load_input(args.input)
    bank = _bank_for(f.grid, args)
    coeffs = analyze(f, bank, args.offset)
    out = _out_dir(args)
    report = _report_header("analyze", args, f.grid, bank)
    channels = {}
    for (j, k), slot in sorted(coeffs.slots.items()):
        channels["%d,%d" % (j, k)] = {
            "shape": list(slot.shape),
            "energy": float(np.sum(np.abs(slot) ** 2)),
        }
    report["channels"] = channels
    report["low_pass_energy"] = float(
        np.sum(np.abs(coeffs.low_pass) ** 2) * f.grid.cell_volume)
    if args.dump_coeffs:
        payload = {"slot_%d_%d" % key: slot
                   for key, slot in coeffs.slots.items()}
        payload["low_pass"] = coeffs.low_pass
        payload["meta"] = np.bytes_(json.dumps({
            "n": f.grid.n, "m": f.grid.m, "L": f.grid.L,
            "offset": coeffs.N, "bank": args.bank or "",
        }).encode("utf-8"))
        np.savez(os.path.join(out, "coeffs.npz"), **payload)
    _write_report(os.path.join(out, "analyze.json"), report)
    return 0


def cmd_synthesize(args):
    with np.load(args.input) as data:
        meta = json.loads(bytes(data["meta"]).decode("utf-8"))
        grid = make_grid(meta["n"], meta["m"], meta["L"])
        bank = bank_from_config(grid, meta["bank"]) if meta["bank"] \
            else build_filter_bank(grid, FilterProfile(), meta["offset"])
        slots = {}
        for name in data.files:
            if name.startswith("slot_"):
                _, j, k = name.split("_")
                slots[(int(j), int(k))] = data[name]
        coeffs = CoefficientField(bank, meta["offset"], slots,
                                  data["low_pass"])
    f = synthesize_discrete(coeffs, bank)
    out = _out_dir(args)
    write_block(os.path.join(out, "synthesized.bin"), f)
    report = _report_header("synthesize", args, grid, bank)
    report["l2_norm"] = lp_norm(f, 2.0)
    _write_report(os.path.join(out, "synthesize.json"), report)
    return 0


def cmd_squarefunc(args):
    f = _load_input(args.input)
    bank = _bank_for(f.grid, args)
    sf = g_flag(f, bank)
    out = _out_dir(args)
    write_block(os.path.join(out, "squarefunc.bin"), sf)
    report = _report_header("squarefunc", args, f.grid, bank)
    report["l2_norm"] = lp_norm(sf, 2.0)
    report["sup"] = float(np.max(np.abs(sf.values)))
    _write_report(os.path.join(out, "squarefunc.json"), report)
    return 0


def cmd_hardy_norm(args):
    f = _load_input(args.input)
    bank = _bank_for(f.grid, args)
    value = hardy_norm(f, bank, args.p, args.offset)
    out = _out_dir(args)
    report = _report_header("hardy-norm", args, f.grid, bank)
    report["p"] = args.p
    report["norm"] = value
    _write_report(os.path.join(out, "hardy-norm.json"), report)
    return 0


def cmd_cmo_norm(args):
    f = _load_input(args.input)
    bank = _bank_for(f.grid, args)
    coeffs = analyze(f, bank, args.offset)
    budget = args.candidates
    if args.auto_budget:
        budget = max(8, f.grid.samples_per_axis)
    candidates = generate_candidates(coeffs, budget)
    value = cmo_norm(f, bank, args.p, args.offset, candidates)
    out = _out_dir(args)
    report = _report_header("cmo-norm", args, f.grid, bank)
    report["p"] = args.p
    report["candidate_count"] = len(candidates)
    report["norm"] = value
    _write_report(os.path.join(out, "cmo-norm.json"), report)
    return 0


def cmd_maximal(args):
    f = _load_input(args.input)
    config = MaximalConfig(args.family)
    op = hl_maximal if args.family == "dyadic-cubes" else strong_maximal
    mf = op(f, config)
    out = _out_dir(args)
    write_block(os.path.join(out, "maximal.bin"), mf)
    report = _report_header("maximal", args, f.grid)
    report["family"] = args.family
    report["sup"] = float(np.max(mf.values.real))
    _write_report(os.path.join(out, "maximal.json"), report)
    return 0


def cmd_cz_decompose(args):
    f = _load_input(args.input)
    bank = _bank_for(f.grid, args)
    good, bad, rep = cz_decompose(f, bank, args.alpha, args.offset,
                                  p=args.p, p1=args.p1, p2=args.p2,
                                  tol=args.tol)
    out = _out_dir(args)
    write_block(os.path.join(out, "good.bin"), good)
    write_block(os.path.join(out, "bad.bin"), bad)
    report = _report_header("cz-decompose", args, f.grid, bank)
    report["alpha"] = rep.alpha
    report["g_norm"] = rep.g_norm
    report["b_norm"] = rep.b_norm
    report["f_norm"] = rep.f_norm
    report["fitted_c_g"] = rep.fitted_c_g
    report["fitted_c_b"] = rep.fitted_c_b
    report["neumann_iterations"] = rep.iterations
    report["level_set_measures"] = list(rep.level_set_measures)
    report["support_violations"] = support_violations(rep, bank)
    residual = good + bad - f
    report["split_residual"] = lp_norm(residual, 2.0) / max(rep.f_norm, 1e-300)
    _write_report(os.path.join(out, "cz-decompose.json"), report)
    return 0


def _kernel_from_args(args):
    if args.expr:
        return custom_kernel(args.expr, args.support)
    return builtin_kernel(args.name)


def cmd_kernel(args):
    out = _out_dir(args)
    kernel = _kernel_from_args(args)
    report = _report_header("kernel", args)
    report["kernel"] = kernel.name
    report["action"] = args.action
    if args.action == "validate":
        if kernel.singular_support == "product":
            result = validate_product_kernel(kernel, args.budget)
        else:
            result = validate_flag_kernel(kernel, args.budget)
        result = _jsonable_validation(result)
        report["result"] = result
        _write_report(os.path.join(out, "kernel.json"), report)
        return 0 if result["passes"] else 1
    if args.action == "project":
        projected = project_to_flag(kernel)
        samples = {}
        for x in (0.25, 0.5, 1.0):
            for y in (0.25, 0.5, 1.0):
                samples["%g,%g" % (x, y)] = projected(x, y)
        report["samples"] = samples
        _write_report(os.path.join(out, "kernel.json"), report)
        return 0
    f = _load_input(args.input)
    eps = args.eps_factor * f.grid.spacing
    result = flag_convolve(f, kernel, eps)
    write_block(os.path.join(out, "convolved.bin"), result)
    report["eps"] = eps
    report["operator_norm"] = convolution_operator_norm(kernel, f.grid, eps)
    report["l2_norm"] = lp_norm(result, 2.0)
    _write_report(os.path.join(out, "kernel.json"), report)
    return 0


def _jsonable_validation(result):
    def fix(obj):
        if isinstance(obj, dict):
            return {("%s" % (",".join(map(str, k))) if isinstance(k, tuple)
                     else str(k)): fix(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [fix(v) for v in obj]
        return obj
    return fix(result)


def _verify_partition(L):
    grid = make_grid(1, 1, L)
    bank = build_filter_bank(grid, FilterProfile(), 2)
    total1 = sum(np.abs(p) ** 2 for p in bank.psi1_hat) \
        + np.abs(bank.low_pass1_hat) ** 2
    total2 = sum(np.abs(p) ** 2 for p in bank.psi2_hat) \
        + np.abs(bank.low_pass2_hat) ** 2
    residual = max(float(np.max(np.abs(total1 - 1.0))),
                   float(np.max(np.abs(total2 - 1.0))))
    return residual, residual <= 1e-10


def _verify_plancherel(L, seed=11):
    grid = make_grid(1, 1, L)
    bank = build_filter_bank(grid, FilterProfile(), 2)
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    worst = 0.0
    for _ in range(5):
        f = SampledFunction(grid, rng.standard_normal(grid.shape)
                            + 1j * rng.standard_normal(grid.shape))
        sf = g_flag(f, bank)
        fhat = np.fft.fftn(f.values)
        low = np.fft.ifftn(bank.low_pass_hat * fhat)
        total = (np.sum(np.abs(sf.values) ** 2)
                 + np.sum(np.abs(low) ** 2)) * grid.cell_volume
        ref = np.sum(np.abs(f.values) ** 2) * grid.cell_volume
        worst = max(worst, abs(total - ref) / ref)
    return worst, worst <= 1e-9


def _verify_remainder_decay(L):
    grid = make_grid(1, 1, L)
    norms = [estimate_remainder_norm(build_filter_bank(grid, FilterProfile(), N))
             for N in (1, 2, 3)]
    ok = all(b < a for a, b in zip(norms, norms[1:]))
    ratios = [a / b for a, b in zip(norms, norms[1:])]
    ok = ok and all(1.5 <= r <= 2.5 for r in ratios)
    return max(norms), ok


def _verify_roundtrip(L, seed=13):
    grid = make_grid(1, 1, L)
    bank = build_filter_bank(grid, FilterProfile(), 3)
    functions, _ = gen_corpus(grid, 4, seed, bank=bank, N=3)
    worst = 0.0
    for f in functions:
        inverted, _ = neumann_inverse(f, bank, 3, tol=1e-8)
        back = synthesize_discrete(analyze(inverted, bank, 3), bank)
        num = lp_norm(back - f, 2.0)
        den = lp_norm(f, 2.0)
        worst = max(worst, num / max(den, 1e-300))
    return worst, worst <= 1e-7


def cmd_verify(args):
    runners = {
        "partition": _verify_partition,
        "plancherel": _verify_plancherel,
        "remainder-decay": _verify_remainder_decay,
        "roundtrip": _verify_roundtrip,
    }
    residual, ok = runners[args.suite](args.L)
    out = _out_dir(args)
    report = _report_header("verify", args)
    report["suite"] = args.suite
    report["L"] = args.L
    report["maxResidual"] = residual
    report["passes"] = ok
    _write_report(os.path.join(out, "verify.json"), report)
    return 0 if ok else 1


def cmd_gen_corpus(args):
    grid = make_grid(args.n, args.m, args.L)
    functions, manifest = gen_corpus(grid, args.count, args.seed, N=args.offset)
    out = _out_dir(args)
    for idx, f in enumerate(functions):
        write_block(os.path.join(out, "corpus-%03d.bin" % idx), f)
    report = _report_header("gen-corpus", args, grid)
    report["manifest"] = manifest
    _write_report(os.path.join(out, "manifest.json"), report)
    return 0


def _add_common(sub):
    sub.add_argument("--out", default=".", help="output directory")
    sub.add_argument("--jobs", type=int, default=None,
                     help="worker count (default: FLAGLP_JOBS or all cores)")
    sub.add_argument("--offset", type=int, default=3,
                     help="scale offset N of the anchored sampling")
    sub.add_argument("--bank", default="",
                     help="bank configuration, comma-separated key=value")
    sub.add_argument("--config", default="",
                     help="file of key=value lines merged into --bank")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="flaglp",
        description="discrete two-parameter Littlewood-Paley analysis")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="subcommand", required=True)

    p = subs.add_parser("analyze", help="decompose a block into coefficients")
    p.add_argument("input")
    p.add_argument("--dump-coeffs", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = subs.add_parser("synthesize", help="rebuild a block from coefficients")
    p.add_argument("input", help="coeffs.npz written by analyze --dump-coeffs")
    _add_common(p)
    p.set_defaults(func=cmd_synthesize)

    p = subs.add_parser("squarefunc", help="pointwise square function")
    p.add_argument("input")
    _add_common(p)
    p.set_defaults(func=cmd_squarefunc)

    p = subs.add_parser("hardy-norm", help="square-function based p-norm")
    p.add_argument("input")
    p.add_argument("--p", type=float, default=1.0)
    _add_common(p)
    p.set_defaults(func=cmd_hardy_norm)

    p = subs.add_parser("cmo-norm", help="Carleson-sum norm lower bound")
    p.add_argument("input")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--candidates", type=int, default=32)
    p.add_argument("--auto-budget", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_cmo_norm)

    p = subs.add_parser("maximal", help="dyadic maximal function")
    p.add_argument("input")
    p.add_argument("--family", choices=("dyadic-cubes", "dyadic-rectangles"),
                   default="dyadic-rectangles")
    _add_common(p)
    p.set_defaults(func=cmd_maximal)

    p = subs.add_parser("cz-decompose", help="good/bad split at a threshold")
    p.add_argument("input")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--p", type=float, default=0.9)
    p.add_argument("--p1", type=float, default=2.0)
    p.add_argument("--p2", type=float, default=0.7)
    p.add_argument("--tol", type=float, default=1e-10)
    _add_common(p)
    p.set_defaults(func=cmd_cz_decompose)

    p = subs.add_parser("kernel", help="kernel certification and convolution")
    p.add_argument("action", choices=("validate", "project", "convolve"))
    p.add_argument("input", nargs="?", default="",
                   help="input block (convolve only)")
    p.add_argument("--name", default="k2-flag",
                   help="registry kernel name")
    p.add_argument("--expr", default="",
                   help="custom kernel expression in x, y")
    p.add_argument("--support", choices=("product", "flag", "none"),
                   default="flag")
    p.add_argument("--budget", type=int, default=2048)
    p.add_argument("--eps-factor", type=float, default=2.0)
    _add_common(p)
    p.set_defaults(func=cmd_kernel)

    p = subs.add_parser("verify", help="run one acceptance-style suite")
    p.add_argument("--suite", choices=VERIFY_SUITES, required=True)
    p.add_argument("--L", type=int, default=7)
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = subs.add_parser("gen-corpus", help="deterministic test corpus")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--L", type=int, default=6)
    _add_common(p)
    p.set_defaults(func=cmd_gen_corpus)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    try:
        return args.func(args)
    except (FileNotFoundError, OSError, ConfigurationError) as exc:
        print("error: %s" % (exc,), file=sys.stderr)
        return 2
    except FlagLPError as exc:
        print("error: %s" % (exc,), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
