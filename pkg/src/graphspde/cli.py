"""Command-line interface: reproducible experiments over the library.

Subcommands: ``synth``, ``backtest``, ``validate-kernel``, ``sample``,
``fit``.  Every run is driven by flags plus an optional JSON config file
(flags win); seeds are explicit everywhere, so reruns are byte-identical
apart from wall-time fields.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .backtest import BacktestPlan
from .data_io import (
    SyntheticSpec,
    gen_heat_line,
    gen_wave_line,
    load_graph_csv,
    load_series_csv,
    write_graph_csv,
    write_series_csv,
)
from .exceptions import DataError, NumericError
from .experiments import run_backtest
from .gp import FitOptions, GPModel, SpatioTemporalDataset, fit as fit_gp, sample, sampling_moments
from .graphs import Graph, fractional_from_graph, line_graph
from .kernels import KernelSpec, STPoint, shek_cov, swek_cov
from .sde import empirical_cross_cov, simulate_heat, simulate_wave

KERNEL_NAMES = ("laplacian", "matern", "sep-matern-rbf", "sep-laplacian-rbf", "shek", "swek")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# config and small parsers
# ---------------------------------------------------------------------------


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise DataError("config root must be a JSON object")
    return config


def _setting(args, config: dict, section: str, key: str, default=None):
    """Precedence: CLI flag > config[section][key] > config[key] > default."""
    flag = getattr(args, key.replace("-", "_"), None)
    if flag is not None:
        return flag
    if isinstance(config.get(section), dict) and key in config[section]:
        return config[section][key]
    if key in config:
        return config[key]
    return default


def _parse_times(spec: str) -> tuple[float, ...]:
    """Time grids: 'a:b' (integer steps, inclusive), 'a:b:step', or 'a,b,c'."""
    spec = str(spec).strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) == 2:
            start, stop = float(parts[0]), float(parts[1])
            step = 1.0
        elif len(parts) == 3:
            start, stop, step = float(parts[0]), float(parts[1]), float(parts[2])
        else:
            raise DataError(f"bad time range {spec!r}; expected start:stop[:step]")
        if step <= 0 or stop < start:
            raise DataError(f"bad time range {spec!r}")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + k * step for k in range(count))
    try:
        return tuple(float(tok) for tok in spec.split(",") if tok.strip())
    except ValueError:
        raise DataError(f"bad time list {spec!r}") from None


def _parse_values(spec: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in str(spec).split(","))
    except ValueError:
        raise DataError(f"bad value list {spec!r}") from None


def _kernel_spec(name: str, hyper: dict) -> KernelSpec:
    """Build a KernelSpec from a CLI kernel name and hyperparameter defaults."""
    name = name.strip().lower()
    nu, kappa = hyper["nu"], hyper["kappa"]
    if name == "shek" or name == "swek":
        return KernelSpec(
            kind=name,
            hyper={"c": hyper["c"], "sigma": hyper["sigma"], "nu": nu, "kappa": kappa},
            laplacian_variant=hyper["variant"],
        )
    if name == "laplacian":
        return KernelSpec(kind="laplacian_spatial", hyper={"variance": hyper["variance"]},
                          laplacian_variant=hyper["variant"])
    if name == "matern":
        return KernelSpec(kind="matern_spatial",
                          hyper={"nu": nu, "kappa": kappa, "variance": hyper["variance"]},
                          laplacian_variant=hyper["variant"])
    if name.startswith("sep-"):
        parts = name.split("-")
        if len(parts) == 3 and parts[1] in ("matern", "laplacian"):
            spatial = _kernel_spec(parts[1], {**hyper, "variance": 1.0})
            sep_hyper = {"variance": hyper["variance"]}
            if parts[2] != "brownian":
                sep_hyper["time_lengthscale"] = hyper["time_lengthscale"]
            return KernelSpec(
                kind="separable_product",
                hyper=sep_hyper,
                temporal_kind=parts[2],
                laplacian_variant=hyper["variant"],
                spatial=spatial,
            )
    raise DataError(f"unknown kernel {name!r}; expected one of {KERNEL_NAMES} or sep-<spatial>-<temporal>")


def _hyper_defaults(args, config: dict, section: str, skip: tuple[str, ...] = ()) -> dict:
    return {
        "c": 1.0 if "c" in skip else float(_setting(args, config, section, "c", 1.0)),
        "sigma": float(_setting(args, config, section, "sigma", 1.0)),
        "nu": float(_setting(args, config, section, "nu", 1.5)),
        "kappa": float(_setting(args, config, section, "kappa", 1.0)),
        "time_lengthscale": float(_setting(args, config, section, "time_lengthscale", 5.0)),
        "variance": float(_setting(args, config, section, "variance", 1.0)),
        "variant": str(_setting(args, config, section, "variant", "unnormalized")),
    }


def _out_dir(args, config: dict) -> Path:
    out = Path(_setting(args, config, "", "out", "out"))
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _load_dataset(args, config: dict, section: str) -> tuple[Graph, SpatioTemporalDataset]:
    """Dataset from --graph/--series files, or from an inline synth spec."""
    graph_path = _setting(args, config, section, "graph")
    series_path = _setting(args, config, section, "series")
    synth = _setting(args, config, section, "synth")
    if graph_path and series_path:
        graph = load_graph_csv(graph_path)
        return graph, load_series_csv(series_path, graph)
    if synth:
        if not isinstance(synth, dict):
            raise DataError("config 'synth' must be an object")
        spec = SyntheticSpec(
            kind=str(synth.get("kind", "heat_line")).replace("-", "_"),
            n_nodes=int(synth.get("nodes", 21)),
            coefficient=float(synth.get("k", 1.0)),
            timestamps=_parse_times(synth.get("t", "1:60")),
            noise_sd=float(synth.get("noise_sd", 0.0)),
            seed=int(synth.get("seed", _setting(args, config, section, "seed", 0))),
        )
        gen = gen_heat_line if spec.kind == "heat_line" else gen_wave_line
        return gen(spec)
    raise DataError("need either --graph and --series files or a 'synth' config entry")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_synth(args) -> int:
    config = _load_config(args.config)
    out = _out_dir(args, config)
    kind = str(_setting(args, config, "synth", "kind", "heat-line")).replace("-", "_")
    spec = SyntheticSpec(
        kind=kind,
        n_nodes=int(_setting(args, config, "synth", "nodes", 21 if kind == "heat_line" else 11)),
        coefficient=float(_setting(args, config, "synth", "k", 1.0)),
        timestamps=_parse_times(_setting(args, config, "synth", "t", "1:60")),
        noise_sd=float(_setting(args, config, "synth", "noise_sd", 0.0)),
        seed=int(_setting(args, config, "synth", "seed", 0)),
    )
    gen = gen_heat_line if spec.kind == "heat_line" else gen_wave_line
    graph, dataset = gen(spec)
    try:
        write_graph_csv(graph, out / "graph.csv")
        write_series_csv(dataset, out / "series.csv")
        provenance = {
            "command": "synth",
            "package_version": __version__,
            "spec": {
                "kind": spec.kind,
                "n_nodes": spec.n_nodes,
                "coefficient": spec.coefficient,
                "timestamps": list(spec.timestamps),
                "noise_sd": spec.noise_sd,
                "seed": spec.seed,
            },
        }
        with open(out / "provenance.json", "w", encoding="utf-8") as fh:
            json.dump(provenance, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise DataError(f"cannot write outputs under {out}: {exc}") from exc
    print(f"wrote {out / 'graph.csv'}, {out / 'series.csv'} "
          f"({spec.n_nodes} nodes x {len(spec.timestamps)} timestamps)")
    return 0


def _format_cell(value, digits=4) -> str:
    if value is None:
        return ""
    return f"{value:.{digits}g}"


def cmd_backtest(args) -> int:
    config = _load_config(args.config)
    out = _out_dir(args, config)
    section = "backtest"
    graph, dataset = _load_dataset(args, config, section)

    names = _setting(args, config, section, "kernels", "shek,sep-matern-rbf,sep-laplacian-rbf")
    if isinstance(names, str):
        names = [n.strip() for n in names.split(",") if n.strip()]
    hyper = _hyper_defaults(args, config, section)
    kernels = {name: _kernel_spec(name, hyper) for name in names}
    baseline = str(_setting(args, config, section, "baseline", names[0]))

    plan = BacktestPlan(
        n_train=int(_setting(args, config, section, "n_train", 50)),
        n_test=int(_setting(args, config, section, "n_test", 10)),
        stride=int(_setting(args, config, section, "stride", 1)),
        rounds=int(_setting(args, config, section, "rounds", 10)),
        seed=int(_setting(args, config, section, "seed", 0)),
    )
    task = str(_setting(args, config, section, "task", "both"))
    tasks = ("interpolation", "extrapolation") if task == "both" else (task,)
    fit_opts = FitOptions(
        max_iters=int(_setting(args, config, section, "max_iters", 40)),
        restarts=int(_setting(args, config, section, "restarts", 1)),
        grad_tol=float(_setting(args, config, section, "grad_tol", 1e-4)),
        seed=plan.seed,
    )
    jobs = int(_setting(args, config, section, "jobs", 1))
    mean_policy = str(_setting(args, config, section, "mean_policy", "per_node_training_mean"))

    report = run_backtest(dataset, kernels, plan, baseline, tasks=tasks,
                          fit_opts=fit_opts, jobs=jobs, mean_policy=mean_policy)

    rows_path = out / "results.csv"
    with open(rows_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["round", "kernel", "split", "mae", "mape",
                         "ci_half_width", "dm_vs_baseline_p", "wall_time", "status"])
        for kernel, task_name, result in report.rounds:
            writer.writerow([result.round_index, kernel, task_name,
                             _format_cell(result.mae, 10), _format_cell(result.mape, 10),
                             "", "", f"{result.wall_time:.3f}", "ok"])
        for kernel, task_name, round_index, message in report.failures:
            writer.writerow([round_index, kernel, task_name, "", "", "", "", "", f"failed: {message}"])
        for summary in report.summaries:
            writer.writerow(["all", summary.kernel, summary.task,
                             _format_cell(summary.mae_mean, 10), _format_cell(summary.mape_mean, 10),
                             _format_cell(summary.mae_ci_half_width, 10),
                             _format_cell(summary.dm_p_value, 10), "", "summary"])

    # one row per kernel, one MAE/MAPE/DM column group per task
    print(f"\nbacktest over {plan.rounds} rounds (baseline: {baseline})")
    short = {"interpolation": "int", "extrapolation": "ext"}
    by_kernel: dict[str, dict[str, object]] = {name: {} for name in kernels}
    for summary in report.summaries:
        by_kernel[summary.kernel][summary.task] = summary
    header = f"{'kernel':<20}"
    for task in tasks:
        tag = short[task]
        header += f"{'MAE_' + tag:>12}{'+-95%':>10}{'MAPE_' + tag:>10}{'DM p_' + tag:>10}"
    print(header)
    print("-" * len(header))
    for name in kernels:
        row = f"{name:<20}"
        for task in tasks:
            summary = by_kernel[name].get(task)
            if summary is None:
                row += f"{'':>12}{'':>10}{'':>10}{'':>10}"
                continue
            ci = _format_cell(summary.mae_ci_half_width) if summary.mae_ci_half_width is not None else "n/a"
            row += (f"{summary.mae_mean:>12.4g}{ci:>10}"
                    f"{_format_cell(summary.mape_mean):>10}{_format_cell(summary.dm_p_value):>10}")
        print(row)
    if plan.rounds == 1:
        print("single round: confidence intervals omitted")
    if report.failures:
        print(f"{len(report.failures)} round(s) failed; see {rows_path}")
    print(f"results written to {rows_path}")
    return 0


def cmd_validate_kernel(args) -> int:
    config = _load_config(args.config)
    out = _out_dir(args, config)
    section = "validate"
    kernel = str(_setting(args, config, section, "kernel", "shek"))
    if kernel not in ("shek", "swek"):
        raise DataError(f"validate-kernel supports 'shek' and 'swek', got {kernel!r}")
    graph_path = _setting(args, config, section, "graph")
    if graph_path:
        graph = load_graph_csv(graph_path)
    else:
        graph = line_graph(int(_setting(args, config, section, "nodes", 3)))
    hyper = _hyper_defaults(args, config, section)
    c, sigma = hyper["c"], hyper["sigma"]
    dt = float(_setting(args, config, section, "dt", 1e-3))
    t_end = float(_setting(args, config, section, "t_end", 1.0))
    n_paths = int(_setting(args, config, section, "n_paths", 50_000))
    seed = int(_setting(args, config, section, "seed", 0))

    frac = fractional_from_graph(graph, hyper["variant"], hyper["nu"], hyper["kappa"])
    steps = int(round(t_end / dt))
    if steps % 2:
        raise DataError("t_end must be an even number of dt steps so t_end/2 is on the grid")
    if kernel == "shek":
        ens = simulate_heat(frac.matrix, c, sigma, np.zeros(graph.n_vertices),
                            dt, t_end, n_paths, seed, save_stride=steps // 2)
        analytic_fn = lambda t, s: shek_cov(frac, c, sigma, t, s)
    else:
        ens = simulate_wave(frac.matrix, c, sigma, np.zeros(graph.n_vertices),
                            np.zeros(graph.n_vertices), dt, t_end, n_paths, seed,
                            save_stride=steps // 2)
        analytic_fn = lambda t, s: swek_cov(frac, c, sigma, t, s)

    half, full = t_end / 2.0, t_end
    pairs = [(half, half), (full, half), (full, full)]
    max_z = 0.0
    rows = []
    for t, s in pairs:
        analytic = analytic_fn(t, s)
        empirical, se = empirical_cross_cov(ens, ens.index_of_time(t), ens.index_of_time(s))
        z = (empirical - analytic) / se
        max_z = max(max_z, float(np.max(np.abs(z))))
        for i in range(graph.n_vertices):
            for j in range(graph.n_vertices):
                rows.append([t, s, graph.labels[i], graph.labels[j],
                             f"{analytic[i, j]:.10g}", f"{empirical[i, j]:.10g}",
                             f"{se[i, j]:.4g}", f"{z[i, j]:.3f}"])

    path = out / f"validate_{kernel}.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "s", "node_i", "node_j", "analytic", "empirical", "se", "z"])
        writer.writerows(rows)

    verdict = "PASS" if max_z <= 4.0 else "FAIL"
    print(f"{kernel}: max |empirical - analytic| / SE = {max_z:.2f} over {len(rows)} entries "
          f"({n_paths} paths, dt={dt:g}) -> {verdict}")
    print(f"table written to {path}")
    return 0 if verdict == "PASS" else 3


def cmd_sample(args) -> int:
    config = _load_config(args.config)
    out = _out_dir(args, config)
    section = "sample"
    hyper = _hyper_defaults(args, config, section, skip=("c",))  # --c may be a list here
    kernel_name = str(_setting(args, config, section, "kernel", "shek"))
    graph_path = _setting(args, config, section, "graph")
    if graph_path:
        graph = load_graph_csv(graph_path)
    else:
        graph = line_graph(int(_setting(args, config, section, "nodes", 3)))

    times = _parse_times(_setting(args, config, section, "times", "0:2:0.05"))
    n_samples = int(_setting(args, config, section, "n_samples", 5))
    seed = int(_setting(args, config, section, "seed", 0))
    noise = float(_setting(args, config, section, "noise", 1e-8))
    condition = _setting(args, config, section, "condition")

    c_values = _setting(args, config, section, "c", 1.0)
    if isinstance(c_values, str):
        c_values = _parse_values(c_values)
    elif not isinstance(c_values, (list, tuple)):
        c_values = (float(c_values),)

    points = [STPoint(vertex=v, time=float(t)) for t in times for v in range(graph.n_vertices)]

    condition_data = None
    if condition is not None:
        values = _parse_values(condition) if isinstance(condition, str) else tuple(condition)
        if len(values) != graph.n_vertices:
            raise DataError(
                f"--condition needs one value per vertex ({graph.n_vertices}), got {len(values)}"
            )
        condition_data = SpatioTemporalDataset(
            graph=graph,
            observations=tuple(
                (STPoint(vertex=v, time=0.0), float(values[v])) for v in range(graph.n_vertices)
            ),
        )

    written = []
    for c in c_values:
        spec = _kernel_spec(kernel_name, {**hyper, "c": float(c)})
        model = GPModel(kernel=spec, noise_variance=noise)
        mean, cov = sampling_moments(model, points, condition_data, graph=graph)
        sd = np.sqrt(np.clip(np.diag(cov), 0.0, None))
        draws = sample(model, points, n_samples, seed, condition_on=condition_data, graph=graph)

        path = out / f"samples_c{c:g}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["node", "time", "series", "value"])
            for k, point in enumerate(points):
                label = graph.labels[point.vertex]
                writer.writerow([label, f"{point.time:.10g}", "mean", f"{mean[k]:.10g}"])
                writer.writerow([label, f"{point.time:.10g}", "lo95", f"{mean[k] - 1.96 * sd[k]:.10g}"])
                writer.writerow([label, f"{point.time:.10g}", "hi95", f"{mean[k] + 1.96 * sd[k]:.10g}"])
                for s_idx in range(n_samples):
                    writer.writerow([label, f"{point.time:.10g}", f"sample_{s_idx:03d}",
                                     f"{draws[s_idx, k]:.10g}"])
        written.append(path)
    print("wrote " + ", ".join(str(p) for p in written))
    return 0


def cmd_fit(args) -> int:
    config = _load_config(args.config)
    out = _out_dir(args, config)
    section = "fit"
    graph, dataset = _load_dataset(args, config, section)
    hyper = _hyper_defaults(args, config, section)
    kernel_name = str(_setting(args, config, section, "kernel", "shek"))
    spec = _kernel_spec(kernel_name, hyper)
    noise = float(_setting(args, config, section, "noise", 1e-2))
    opts = FitOptions(
        max_iters=int(_setting(args, config, section, "max_iters", 100)),
        restarts=int(_setting(args, config, section, "restarts", 2)),
        seed=int(_setting(args, config, section, "seed", 0)),
    )
    model = GPModel(kernel=spec, noise_variance=noise)
    result = fit_gp(model, dataset, opts)
    payload = {
        "kernel": kernel_name,
        "hyper": {k: float(v) for k, v in result.model.kernel.hyper.items()},
        "noise_variance": result.model.noise_variance,
        "lml": result.lml,
        "trace_length": len(result.trace),
    }
    with open(out / f"fit_{kernel_name}.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its keys")
    common.add_argument("--seed", type=int, help="global random seed")
    common.add_argument("--jobs", type=int, help="worker threads for independent rounds")
    common.add_argument("--out", help="output directory (default: out)")

    parser = _Parser(prog="graphspde", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic line-graph dataset")
    p.add_argument("--kind", choices=["heat-line", "wave-line"])
    p.add_argument("--nodes", type=int)
    p.add_argument("--k", type=float, help="conductivity (heat) or wave speed (wave)")
    p.add_argument("--t", help="timestamps, e.g. 1:50 or 1:10:0.5 or 1,2,5")
    p.add_argument("--noise-sd", dest="noise_sd", type=float)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("backtest", parents=[common], help="sliding-window backtest of kernels")
    p.add_argument("--graph")
    p.add_argument("--series")
    p.add_argument("--kernels", help="comma list, e.g. shek,sep-matern-rbf")
    p.add_argument("--baseline")
    p.add_argument("--task", choices=["interpolation", "extrapolation", "both"])
    p.add_argument("--n-train", dest="n_train", type=int)
    p.add_argument("--n-test", dest="n_test", type=int)
    p.add_argument("--stride", type=int)
    p.add_argument("--rounds", type=int)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--restarts", type=int)
    for flag in ("--c", "--sigma", "--nu", "--kappa", "--time-lengthscale", "--variance"):
        p.add_argument(flag, type=float)
    p.set_defaults(func=cmd_backtest)

    p = sub.add_parser("validate-kernel", parents=[common],
                       help="check an analytic kernel against Euler-Maruyama simulation")
    p.add_argument("--kernel", choices=["shek", "swek"])
    p.add_argument("--graph")
    p.add_argument("--nodes", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--n-paths", dest="n_paths", type=int)
    for flag in ("--c", "--sigma", "--nu", "--kappa"):
        p.add_argument(flag, type=float)
    p.set_defaults(func=cmd_validate_kernel)

    p = sub.add_parser("sample", parents=[common], help="emit mean, 95% band and sample paths as CSV")
    p.add_argument("--kernel")
    p.add_argument("--graph")
    p.add_argument("--nodes", type=int)
    p.add_argument("--times", help="time grid, e.g. 0:2:0.05")
    p.add_argument("--condition", help="comma list of values at t=0, one per vertex")
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--noise", type=float)
    p.add_argument("--c", help="diffusivity / wave speed; accepts a comma list (one CSV per value)")
    for flag in ("--sigma", "--nu", "--kappa", "--time-lengthscale", "--variance"):
        p.add_argument(flag, type=float)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("fit", parents=[common], help="fit kernel hyperparameters to a dataset")
    p.add_argument("--graph")
    p.add_argument("--series")
    p.add_argument("--kernel")
    p.add_argument("--noise", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--restarts", type=int)
    for flag in ("--c", "--sigma", "--nu", "--kappa", "--time-lengthscale", "--variance"):
        p.add_argument(flag, type=float)
    p.set_defaults(func=cmd_fit)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
