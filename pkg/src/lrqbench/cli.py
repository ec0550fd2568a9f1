"""Command-line front end.

Subcommands cover the full workflow: ``gen`` writes instances, ``simulate``
runs them (noiseless or noisy, optionally sharded), ``classify`` places
measured shots in a performance regime, ``bench`` sweeps shard counts or
problem sizes, ``fitnoise`` extracts the decay constant from a set of
noisy runs, and ``hqc`` prints the credit cost of a hypothetical job.

Every file-writing invocation also writes ``<output>.manifest.json``
recording the tool version, argv, resolved parameters, and SHA-256
digests of inputs and outputs; ``replay`` re-executes a manifest's argv.
Exit codes: 0 success, 2 bad input, 3 over a capacity limit, 4 runtime
failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import statistics
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import LrQaoaParams, build_circuit, gate_counts, hqc_cost
from .engine import (
    Precision,
    exact_expected_r,
    run_circuit,
    sample,
    save_statevector,
)
from .errors import (
    AbortedRunError,
    CapacityError,
    StateError,
    ValidationError,
)
from .noise import DepolarizingConfig, epsilon_accumulated, fit_k0, r_overlap, run_noisy_ensemble
from .problem import (
    approximation_ratio,
    generate_instance,
    load_instance,
    random_baseline_expectation,
    save_instance,
    shot_ratios,
    solve_instance,
)
from .rng import derive_seed
from .sharded import (
    SweepConfig,
    plan_for_shard_count,
    run_circuit_sharded,
    scaling_sweep,
    write_timing_csv,
)
from .stats import ResampleConfig, classify, kde_curve, mean_of_means, uniform_sampler

_EXIT_OK = 0
_EXIT_VALIDATION = 2
_EXIT_CAPACITY = 3
_EXIT_RUNTIME = 4


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("LRQBENCH_THREADS", "1")))
    except ValueError:
        return 1


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _jsonable(value):
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _write_manifest(args, inputs: list[Path], outputs: list[Path]) -> Path:
    anchor = outputs[0]
    params = {
        k: _jsonable(v)
        for k, v in vars(args).items()
        if k not in ("func", "argv") and not callable(v)
    }
    manifest = {
        "tool": "lrqbench",
        "version": __version__,
        "command": args.command,
        "argv": list(args.argv),
        "params": params,
        "timestamp_utc": datetime.now(timezone.utc).isoformat(),
        "inputs": {str(p): _sha256(Path(p)) for p in inputs},
        "outputs": {str(p): _sha256(Path(p)) for p in outputs},
    }
    path = Path(str(anchor) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _load_results(path: Path) -> dict:
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read results file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"results file {path} is not a JSON object")
    return data


# ---------------------------------------------------------------------------
# subcommands


def _cmd_gen(args) -> int:
    inst = generate_instance(args.n, args.seed)
    if args.n <= args.solve_limit:
        inst = solve_instance(inst, limit=args.solve_limit, threads=args.threads)
    else:
        print(
            f"warning: n={args.n} exceeds solve limit {args.solve_limit}; "
            "optimal cut omitted",
            file=sys.stderr,
        )
    save_instance(inst, args.out)
    _write_manifest(args, inputs=[], outputs=[args.out])
    opt = "null" if inst.optimal_cut is None else f"{inst.optimal_cut.value:.6f}"
    print(f"wrote {args.out}: n={args.n} edges={inst.num_edges} optimal={opt}")
    return _EXIT_OK


def _resolved_deltas(args) -> tuple[float, float]:
    beta = args.delta if args.delta_beta is None else args.delta_beta
    gamma = args.delta if args.delta_gamma is None else args.delta_gamma
    return beta, gamma


def _cmd_simulate(args) -> int:
    inst = load_instance(args.instance)
    delta_beta, delta_gamma = _resolved_deltas(args)
    params = LrQaoaParams(p=args.p, delta_beta=delta_beta, delta_gamma=delta_gamma)
    circuit = build_circuit(inst, params)
    n_1q, n_2q = gate_counts(inst.num_vertices, args.p)
    solved = inst.optimal_cut is not None

    payload = {
        "n": inst.num_vertices,
        "p": args.p,
        "delta_beta": delta_beta,
        "delta_gamma": delta_gamma,
        "seed": args.seed,
        "precision": args.precision,
        "n_1q": n_1q,
        "n_2q": n_2q,
        "mode": args.mode,
    }
    outputs = [args.out]

    if args.mode == "noiseless":
        if args.shards > 1:
            plan = plan_for_shard_count(inst.num_vertices, args.shards)
            sv, record = run_circuit_sharded(
                circuit, plan, args.precision, args.memory_bytes
            )
            timing_path = args.out.with_suffix(".timing.csv")
            with open(timing_path, "w", newline="") as fh:
                write_timing_csv([record], fh)
            outputs.append(timing_path)
        else:
            sv = run_circuit(circuit, args.precision, args.memory_bytes)
        shots = sample(sv, args.shots, args.seed)
        payload.update(
            {
                "shards": args.shards,
                "shots": args.shots,
                "mean_r": approximation_ratio(inst, shots) if solved else None,
                "exact_expected_r": exact_expected_r(sv, inst) if solved else None,
                "bitstrings": shots.bitstrings(),
            }
        )
        if args.dump_state is not None:
            save_statevector(sv, args.dump_state)
            outputs.append(args.dump_state)
    else:
        cfg = DepolarizingConfig(
            epsilon=args.epsilon, trajectories=args.trajectories, rng_seed=args.seed
        )
        shots = run_noisy_ensemble(
            circuit,
            cfg,
            args.shots,
            args.precision,
            args.memory_bytes,
            threads=args.threads,
        )
        mean_r = approximation_ratio(inst, shots) if solved else None
        ovl = None
        if solved:
            ideal_sv = run_circuit(circuit, args.precision, args.memory_bytes)
            if args.ideal_shots is None:
                r_ideal = exact_expected_r(ideal_sv, inst)
            else:
                ideal_set = sample(
                    ideal_sv, args.ideal_shots, derive_seed(args.seed, "ideal")
                )
                r_ideal = approximation_ratio(inst, ideal_set)
            r_random = random_baseline_expectation(inst)
            ovl = r_overlap(mean_r, r_random, r_ideal)
            payload.update({"r_ideal": r_ideal, "r_random": r_random})
        payload.update(
            {
                "epsilon": args.epsilon,
                "trajectories": args.trajectories,
                "shots": args.shots,
                "eps_acc": epsilon_accumulated(n_2q, args.epsilon),
                "mean_r": mean_r,
                "r_ovl": ovl,
                "bitstrings": shots.bitstrings(),
            }
        )

    _write_json(args.out, payload)
    _write_manifest(args, inputs=[args.instance], outputs=outputs)
    shown = "n/a" if payload["mean_r"] is None else f"{payload['mean_r']:.4f}"
    print(f"wrote {args.out}: mode={args.mode} mean_r={shown}")
    return _EXIT_OK


def _cmd_classify(args) -> int:
    inst = load_instance(args.instance)
    qpu_data = _load_results(args.qpu)
    bitstrings = qpu_data.get("bitstrings")
    if not bitstrings:
        raise ValidationError(f"{args.qpu} has no bitstrings to classify")
    if args.random_pool_size < 10 * args.n_s:
        raise ValidationError(
            f"random pool of {args.random_pool_size} is too small for "
            f"n_s={args.n_s}; need at least {10 * args.n_s}"
        )
    qpu_r = shot_ratios(inst, bitstrings)
    random_pool = shot_ratios(
        inst, uniform_sampler(inst, args.random_pool_size, args.seed)
    )
    noiseless_pool = None
    inputs = [args.instance, args.qpu]
    if args.noiseless is not None:
        nl_data = _load_results(args.noiseless)
        nl_bits = nl_data.get("bitstrings")
        if not nl_bits:
            raise ValidationError(f"{args.noiseless} has no bitstrings")
        noiseless_pool = shot_ratios(inst, nl_bits)
        inputs.append(args.noiseless)

    cfg = ResampleConfig(
        subsample_size=args.n_s,
        repeats=args.repeats,
        rng_seed=args.seed,
        replacement=args.replacement,
    )
    report = classify(qpu_r, random_pool, cfg, noiseless_pool)
    _write_json(args.out, report.to_dict())
    outputs = [args.out]
    if args.kde_out is not None:
        mom = mean_of_means(
            random_pool, ResampleConfig(
                subsample_size=args.n_s,
                repeats=args.repeats,
                rng_seed=derive_seed(args.seed, "classify", 0),
                replacement=args.replacement,
            ),
        )
        grid, density = kde_curve(mom.subsample_means)
        with open(args.kde_out, "w") as fh:
            fh.write("x,density\n")
            for x, d in zip(grid, density):
                fh.write(f"{x:.12g},{d:.12g}\n")
        outputs.append(args.kde_out)
    _write_manifest(args, inputs=inputs, outputs=outputs)
    print(
        f"verdict={report.verdict.value} qpu_mean_r={report.qpu_mean_r:.4f} "
        f"random_threshold={report.random_threshold:.4f}"
    )
    return _EXIT_OK


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok)
    except ValueError as exc:
        raise ValidationError(f"bad integer list {text!r}") from exc


def _parse_range(text: str) -> tuple[int, ...]:
    if ":" in text:
        try:
            lo, hi = (int(tok) for tok in text.split(":"))
        except ValueError as exc:
            raise ValidationError(f"bad range {text!r}, expected LO:HI") from exc
        return tuple(range(lo, hi + 1))
    return _parse_int_list(text)


def _cmd_bench(args) -> int:
    delta_beta, delta_gamma = _resolved_deltas(args)
    common = dict(
        p=args.p,
        delta_beta=delta_beta,
        delta_gamma=delta_gamma,
        seed=args.seed,
        precision=args.precision,
        repeat=args.repeat,
        memory_budget=args.memory_bytes,
    )
    if args.mode == "strong":
        if args.nq is None:
            raise ValidationError("strong-scaling bench needs --nq")
        cfg = SweepConfig(
            mode="strong", nq=args.nq, shard_counts=_parse_int_list(args.shards), **common
        )
    else:
        if args.nq_range is None or args.nq_local is None:
            raise ValidationError("size bench needs --nq-range and --nq-local")
        cfg = SweepConfig(
            mode="size",
            nq_values=_parse_range(args.nq_range),
            nq_local=args.nq_local,
            **common,
        )
    records = scaling_sweep(cfg)
    with open(args.out, "w", newline="") as fh:
        write_timing_csv(records, fh)
    _write_manifest(args, inputs=[], outputs=[args.out])

    by_key: dict[tuple[int, int], list[float]] = {}
    for rec in records:
        by_key.setdefault((rec.nq, rec.num_shards), []).append(rec.wall_seconds)
    for (nq, shards), walls in sorted(by_key.items()):
        if len(walls) == 1:
            print(f"nq={nq} shards={shards} wall={walls[0]:.3f}s")
        else:
            print(
                f"nq={nq} shards={shards} wall min={min(walls):.3f}s "
                f"median={statistics.median(walls):.3f}s max={max(walls):.3f}s"
            )
    return _EXIT_OK


def _cmd_fitnoise(args) -> int:
    points = []
    skipped = 0
    for path in args.results:
        data = _load_results(path)
        ovl = data.get("r_ovl")
        if ovl is None:
            skipped += 1
            print(f"warning: {path} has no overlap ratio, skipping", file=sys.stderr)
            continue
        if "eps_acc" in data:
            eps_acc = float(data["eps_acc"])
        elif "n_2q" in data and "epsilon" in data:
            eps_acc = epsilon_accumulated(int(data["n_2q"]), float(data["epsilon"]))
        else:
            raise ValidationError(f"{path} lacks eps_acc (or n_2q and epsilon)")
        points.append((eps_acc, float(ovl)))
    if not points:
        raise ValidationError("no usable (eps_acc, r_ovl) points in the inputs")
    fit = fit_k0(points)
    payload = {
        "k0": fit.k0,
        "r_squared": fit.r_squared,
        "n_excluded": fit.n_excluded,
        "n_skipped_files": skipped,
        "points": [
            {
                "eps_acc": x,
                "r_ovl": r,
                "log2_residual": float(-np.log2(r) - fit.k0 * x),
            }
            for x, r in fit.points
        ],
    }
    _write_json(args.out, payload)
    _write_manifest(args, inputs=list(args.results), outputs=[args.out])
    print(f"k0={fit.k0:.6f} r_squared={fit.r_squared:.4f} excluded={fit.n_excluded}")
    return _EXIT_OK


def _cmd_hqc(args) -> int:
    n_1q, n_2q = gate_counts(args.n, args.p)
    n_m = args.n if args.n_m is None else args.n_m
    cost = hqc_cost(n_1q, n_2q, n_m, args.shots)
    print(
        f"n={args.n} p={args.p}: n_1q={n_1q} n_2q={n_2q} n_m={n_m} "
        f"shots={args.shots} hqc={cost:.2f}"
    )
    if args.out is not None:
        _write_json(
            args.out,
            {
                "n": args.n,
                "p": args.p,
                "n_1q": n_1q,
                "n_2q": n_2q,
                "n_m": n_m,
                "shots": args.shots,
                "hqc": cost,
            },
        )
        _write_manifest(args, inputs=[], outputs=[args.out])
    return _EXIT_OK


def _cmd_replay(args) -> int:
    try:
        manifest = json.loads(Path(args.manifest).read_text())
        argv = manifest["argv"]
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise ValidationError(f"cannot replay {args.manifest}: {exc}") from exc
    if not isinstance(argv, list) or not argv:
        raise ValidationError(f"{args.manifest} records no argv to replay")
    return main([str(a) for a in argv])


# ---------------------------------------------------------------------------
# parser


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="seed for every derived stream")
    parser.add_argument(
        "--threads",
        type=int,
        default=_default_threads(),
        help="worker threads for parallelizable pieces (env LRQBENCH_THREADS)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lrqbench",
        description="Linear-ramp QAOA MaxCut simulation and verification toolkit",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {__version__} (python {sys.version.split()[0]}, numpy {np.__version__})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a weighted MaxCut instance")
    p_gen.add_argument("--n", type=int, required=True, help="number of vertices")
    p_gen.add_argument("--out", type=Path, required=True, help="instance JSON path")
    p_gen.add_argument(
        "--solve-limit",
        type=int,
        default=24,
        help="largest n solved exactly; above this the optimal cut is omitted",
    )
    _add_common(p_gen)
    p_gen.set_defaults(func=_cmd_gen)

    p_sim = sub.add_parser("simulate", help="run the circuit for an instance")
    p_sim.add_argument("--instance", type=Path, required=True)
    p_sim.add_argument("--out", type=Path, required=True, help="results JSON path")
    p_sim.add_argument("--p", type=int, default=3, help="circuit depth")
    p_sim.add_argument("--delta", type=float, default=0.2, help="both ramp amplitudes")
    p_sim.add_argument("--delta-beta", type=float, default=None)
    p_sim.add_argument("--delta-gamma", type=float, default=None)
    p_sim.add_argument("--mode", choices=("noiseless", "noisy"), default="noiseless")
    p_sim.add_argument("--shots", type=int, default=100, help="shots (per trajectory when noisy)")
    p_sim.add_argument("--shards", type=int, default=1, help="shard count (power of two)")
    p_sim.add_argument("--precision", choices=("fp32", "fp64"), default="fp32")
    p_sim.add_argument("--epsilon", type=float, default=0.0, help="two-qubit depolarizing rate")
    p_sim.add_argument("--trajectories", type=int, default=1)
    p_sim.add_argument(
        "--ideal-shots",
        type=int,
        default=None,
        help="estimate the ideal baseline from this many shots instead of exactly",
    )
    p_sim.add_argument("--dump-state", type=Path, default=None, help="binary statevector dump")
    p_sim.add_argument("--memory-bytes", type=int, default=None, help="statevector memory budget")
    _add_common(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_cls = sub.add_parser("classify", help="classify measured shots into a regime")
    p_cls.add_argument("--qpu", type=Path, required=True, help="results JSON with bitstrings")
    p_cls.add_argument("--instance", type=Path, required=True)
    p_cls.add_argument("--out", type=Path, required=True, help="report JSON path")
    p_cls.add_argument("--noiseless", type=Path, default=None, help="noiseless results JSON")
    p_cls.add_argument("--random-pool-size", type=int, default=10_000)
    p_cls.add_argument("--n-s", type=int, default=10, help="subsample size")
    p_cls.add_argument("--repeats", type=int, default=100)
    p_cls.add_argument("--replacement", action="store_true", help="subsample with replacement")
    p_cls.add_argument(
        "--kde-out",
        type=Path,
        default=None,
        help="write the density of random-baseline subsample means as CSV",
    )
    _add_common(p_cls)
    p_cls.set_defaults(func=_cmd_classify)

    p_bench = sub.add_parser("bench", help="timing sweeps for the sharded engine")
    p_bench.add_argument("--mode", choices=("strong", "size"), default="strong")
    p_bench.add_argument("--out", type=Path, required=True, help="timing CSV path")
    p_bench.add_argument("--nq", type=int, default=None, help="qubits (strong mode)")
    p_bench.add_argument("--shards", type=str, default="1,2,4", help="shard counts, comma separated")
    p_bench.add_argument("--nq-range", type=str, default=None, help="LO:HI qubit range (size mode)")
    p_bench.add_argument("--nq-local", type=int, default=None, help="local qubits per shard (size mode)")
    p_bench.add_argument("--p", type=int, default=3)
    p_bench.add_argument("--delta", type=float, default=0.2)
    p_bench.add_argument("--delta-beta", type=float, default=None)
    p_bench.add_argument("--delta-gamma", type=float, default=None)
    p_bench.add_argument("--repeat", type=int, default=1)
    p_bench.add_argument("--precision", choices=("fp32", "fp64"), default="fp32")
    p_bench.add_argument("--memory-bytes", type=int, default=None)
    _add_common(p_bench)
    p_bench.set_defaults(func=_cmd_bench)

    p_fit = sub.add_parser("fitnoise", help="fit the overlap decay constant")
    p_fit.add_argument("results", type=Path, nargs="+", help="noisy results JSON files")
    p_fit.add_argument("--out", type=Path, required=True, help="fit JSON path")
    _add_common(p_fit)
    p_fit.set_defaults(func=_cmd_fitnoise)

    p_hqc = sub.add_parser("hqc", help="credit cost of a hypothetical hardware job")
    p_hqc.add_argument("--n", type=int, required=True)
    p_hqc.add_argument("--p", type=int, default=3)
    p_hqc.add_argument("--shots", type=int, default=100)
    p_hqc.add_argument("--n-m", type=int, default=None, help="measured qubits (default: n)")
    p_hqc.add_argument("--out", type=Path, default=None, help="optional JSON output")
    _add_common(p_hqc)
    p_hqc.set_defaults(func=_cmd_hqc)

    p_rep = sub.add_parser("replay", help="re-run the argv recorded in a manifest")
    p_rep.add_argument("manifest", type=Path)
    _add_common(p_rep)
    p_rep.set_defaults(func=_cmd_replay)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    args.argv = list(sys.argv[1:] if argv is None else argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_VALIDATION
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return _EXIT_CAPACITY
    except (StateError, AbortedRunError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return _EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
