"""Command-line interface: data ingestion, fitting, analysis and reports.

Exit codes: 0 success, 1 usage error, 2 data validation error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .core import (
    ConfigurationError,
    Hyperparams,
    NumericalError,
    PanelValidationError,
    RankPanel,
)
from .draws import PosteriorDraws
from .initialization import initialize
from .regions import cluster_subgroups, overlap_graph, regions_at_time
from .report import emit_report
from .sampler import run_chain
from .simulate import GenSpec, generate_panel
from .store import StoreError, load_store, load_traces, save_store
from .summaries import (
    mean_received_rank,
    popularity_correlations,
    pseudo_r2,
    stability_table,
    step_sizes,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


# ---------------------------------------------------------------------------
# Panel file formats


def load_panel(path) -> RankPanel:
    """Read a rank panel from a block-format or long-format file.

    Block format: T whitespace-separated n-by-n integer matrices separated
    by blank lines ('#' comments allowed).  Long format: a `t,i,j,rank`
    header followed by one CSV row per ordered pair, all indices 1-based.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise PanelValidationError(f"cannot read {path}: {exc}") from exc
    stripped = [line.strip() for line in text.splitlines()]
    first = next((ln for ln in stripped if ln and not ln.startswith("#")), "")
    if first.replace(" ", "").lower().startswith("t,i,j"):
        return _parse_long(stripped, path)
    return _parse_blocks(stripped, path)


def _parse_blocks(lines: list[str], path: Path) -> RankPanel:
    blocks: list[list[list[int]]] = []
    current: list[list[int]] = []
    for lineno, line in enumerate(lines, start=1):
        if line.startswith("#"):
            continue
        if not line:
            if current:
                blocks.append(current)
                current = []
            continue
        try:
            current.append([int(tok) for tok in line.split()])
        except ValueError as exc:
            raise PanelValidationError(
                f"{path}:{lineno}: expected whitespace-separated integers"
            ) from exc
    if current:
        blocks.append(current)
    if not blocks:
        raise PanelValidationError(f"{path}: no rank matrices found")
    n = len(blocks[0])
    for b, block in enumerate(blocks, start=1):
        if len(block) != n or any(len(row) != n for row in block):
            raise PanelValidationError(
                f"{path}: matrix {b} is not {n}x{n} like the first one"
            )
    return RankPanel(np.array(blocks, dtype=np.int64))


def _parse_long(lines: list[str], path: Path) -> RankPanel:
    entries = []
    for lineno, line in enumerate(lines, start=1):
        if not line or line.startswith("#") or line.replace(" ", "").lower().startswith("t,i,j"):
            continue
        parts = [tok.strip() for tok in line.split(",")]
        if len(parts) != 4:
            raise PanelValidationError(f"{path}:{lineno}: expected t,i,j,rank")
        try:
            entries.append(tuple(int(tok) for tok in parts))
        except ValueError as exc:
            raise PanelValidationError(f"{path}:{lineno}: non-integer field") from exc
    if not entries:
        raise PanelValidationError(f"{path}: no data rows found")
    T = max(e[0] for e in entries)
    n = max(max(e[1] for e in entries), max(e[2] for e in entries))
    if min(e[0] for e in entries) < 1 or min(min(e[1], e[2]) for e in entries) < 1:
        raise PanelValidationError(f"{path}: long-format indices are 1-based")
    y = np.zeros((T, n, n), dtype=np.int64)
    seen = np.zeros((T, n, n), dtype=bool)
    for t, i, j, rank in entries:
        if seen[t - 1, i - 1, j - 1]:
            raise PanelValidationError(
                f"{path}: duplicate entry for (t={t}, i={i}, j={j})"
            )
        seen[t - 1, i - 1, j - 1] = True
        y[t - 1, i - 1, j - 1] = rank
    return RankPanel(y)


def save_panel(panel: RankPanel, path) -> None:
    """Write a panel in the block format (round-trips through load_panel)."""
    path = Path(path)
    with open(path, "w") as fh:
        for t in range(panel.T):
            for i in range(panel.n):
                fh.write(" ".join(str(int(v)) for v in panel.y[t, i]) + "\n")
            if t < panel.T - 1:
                fh.write("\n")


def load_fraternity() -> RankPanel:
    """The bundled fraternity panel (n=17, T=15)."""
    ref = resources.files("rankspace.data") / "newcomb_fraternity.txt"
    if not ref.is_file():
        raise PanelValidationError(
            "the fraternity panel is not bundled in this build: place "
            "newcomb_fraternity.txt in rankspace/data/ (see the README there "
            "for the exact format)"
        )
    with resources.as_file(ref) as concrete:
        panel = load_panel(concrete)
    if (panel.n, panel.T) != (17, 15):
        raise PanelValidationError(
            f"bundled fraternity panel has n={panel.n}, T={panel.T}; expected 17, 15"
        )
    return panel


# ---------------------------------------------------------------------------
# Commands


def _hyper_from_args(args) -> Hyperparams:
    return Hyperparams(
        kappa=args.kappa,
        iterations=args.iterations,
        burn_in=args.burn_in,
        thin=args.thin,
        seed=args.seed,
        top_q=args.top_q,
    )


def cmd_fit(args) -> int:
    panel = load_fraternity() if args.input is None else load_panel(args.input)
    hyper = _hyper_from_args(args)
    hyper.validate(panel.n)
    out_dir = Path(args.output_dir)
    seeds = np.random.SeedSequence(args.seed).generate_state(max(1, args.chains))
    init = initialize(panel, p=args.p, q=hyper.top_q)
    for chain in range(max(1, args.chains)):
        chain_hyper = Hyperparams(**{**hyper.__dict__, "seed": int(seeds[chain])})
        result = run_chain(panel, chain_hyper, init, progress=True)
        target = out_dir if args.chains <= 1 else out_dir / f"chain_{chain:02d}"
        save_store(
            target, result.draws,
            settings=result.settings,
            traces=result.traces,
            diagnostics={
                "acceptance": result.acceptance,
                "step_latent": result.step_latent,
            },
        )
        print(f"chain {chain}: {result.draws.size} draws stored in {target} "
              f"(latent acceptance {result.acceptance['latent']:.3f})")
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = GenSpec(
        n=args.n, T=args.T, p=args.p,
        hyper=Hyperparams(lambda0=args.lambda0, lambda1=args.lambda1,
                          mu=args.mu, sigma2=args.sigma2),
        seed=args.seed,
    )
    panel, params, X = generate_panel(spec)
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_panel(panel, out_dir / "panel.txt")
    np.savez(out_dir / "truth.npz", X=X, r=params.r, tau0=params.tau0,
             tau1=params.tau1, tau=params.tau, theta=params.theta)
    print(f"simulated panel (n={args.n}, T={args.T}) written to {out_dir}")
    return EXIT_OK


def _load_store_and_panel(args) -> tuple[PosteriorDraws, dict, RankPanel]:
    draws, manifest = load_store(args.store)
    panel = load_fraternity() if args.input is None else load_panel(args.input)
    if (panel.n, panel.T) != (draws.n, draws.T):
        raise ConfigurationError(
            f"store ({draws.n}, {draws.T}) and panel ({panel.n}, {panel.T}) disagree"
        )
    return draws, manifest, panel


def cmd_summarize(args) -> int:
    draws, _, panel = _load_store_and_panel(args)
    r2 = pseudo_r2(panel, draws)
    table = stability_table(draws)
    s = step_sizes(draws)
    corr_sr, corr_rank = popularity_correlations(panel, draws)
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    times = list(range(2, draws.T + 1))
    header = "," + ",".join(str(t) for t in times)
    lines = [header]
    for a, t in enumerate(times):
        lines.append(str(t) + "," + ",".join(f"{table[a, b]:.4f}" for b in range(len(times))))
    (out_dir / "stability_table.csv").write_text("\n".join(lines) + "\n")

    summary = {
        "draws": draws.size,
        "pseudo_r2": r2,
        "corr_step_log_reach": corr_sr,
        "corr_log_reach_mean_rank": corr_rank,
        "step_sizes": [float(v) for v in s],
        "mean_reach": [float(v) for v in draws.mean_reach()],
        "mean_received_rank": [float(v) for v in mean_received_rank(panel)],
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")

    text = [
        f"posterior draws: {draws.size}",
        f"pseudo R2: {r2:.3f}",
        f"corr(step size, log reach): {corr_sr:.3f}",
        f"corr(log reach, mean received rank): {corr_rank:.3f}",
        "stability table written to stability_table.csv "
        "(entry [r, c] = P(tau_c > tau_r), times 2..T)",
    ]
    (out_dir / "summary.txt").write_text("\n".join(text) + "\n")
    print("\n".join(text))
    return EXIT_OK


def cmd_regions(args) -> int:
    draws, _, _ = _load_store_and_panel(args)
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    times = range(draws.T) if args.t is None else [args.t - 1]
    for t in times:
        regs = regions_at_time(draws, t, level=args.level)
        graph = overlap_graph(regs)
        labels = cluster_subgroups(graph, args.k, seed=args.seed)
        np.savetxt(out_dir / f"overlap_t{t + 1:02d}.csv", graph, fmt="%d",
                   delimiter=",")
        with open(out_dir / f"clusters_t{t + 1:02d}.csv", "w") as fh:
            fh.write("actor,cluster\n")
            for i, lab in enumerate(labels):
                fh.write(f"{i + 1},{int(lab)}\n")
        np.savez(
            out_dir / f"regions_t{t + 1:02d}.npz",
            bounds=np.array(regs[0].bounds),
            level=args.level,
            density=np.stack([reg.density for reg in regs]),
            member=np.stack([reg.member for reg in regs]),
            threshold=np.array([reg.threshold for reg in regs]),
        )
    print(f"regions, overlap matrices and clusters written to {out_dir}")
    return EXIT_OK


def cmd_report(args) -> int:
    draws, _, _ = _load_store_and_panel(args)
    traces = load_traces(args.store)
    paths = emit_report(draws, traces, args.output_dir)
    print("\n".join(str(p) for p in paths))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rankspace",
                     description="Latent space inference for ranked dynamic networks")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--output-dir", required=True, help="directory for outputs")
        p.add_argument("--seed", type=int, default=0)

    fit = sub.add_parser("fit", help="initialize and run the sampler")
    add_common(fit)
    fit.add_argument("--input", help="panel file (defaults to the bundled fraternity data)")
    fit.add_argument("--iterations", type=int, default=250_000)
    fit.add_argument("--burn-in", type=int, default=50_000)
    fit.add_argument("--thin", type=int, default=20)
    fit.add_argument("--p", type=int, default=2, help="latent dimension")
    fit.add_argument("--kappa", type=float, default=10_000.0,
                     help="reach proposal concentration")
    fit.add_argument("--chains", type=int, default=1)
    fit.add_argument("--top-q", type=int, default=None,
                     help="truncate each row's likelihood to its top q ranks")
    fit.set_defaults(func=cmd_fit)

    sim = sub.add_parser("simulate", help="draw a synthetic panel from the model")
    add_common(sim)
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--T", type=int, required=True)
    sim.add_argument("--p", type=int, default=2)
    sim.add_argument("--lambda0", type=float, default=1.0)
    sim.add_argument("--lambda1", type=float, default=6.0)
    sim.add_argument("--mu", type=float, default=np.log(10.0))
    sim.add_argument("--sigma2", type=float, default=0.25)
    sim.set_defaults(func=cmd_simulate)

    def add_analysis(p):
        add_common(p)
        p.add_argument("--store", required=True, help="sample store directory")
        p.add_argument("--input", help="panel file (defaults to the bundled fraternity data)")

    summ = sub.add_parser("summarize", help="scalar summaries from a sample store")
    add_analysis(summ)
    summ.set_defaults(func=cmd_summarize)

    reg = sub.add_parser("regions", help="credible regions, overlap graphs, clusters")
    add_analysis(reg)
    reg.add_argument("--level", type=float, default=0.95)
    reg.add_argument("--k", type=int, default=3, help="number of subgroups")
    reg.add_argument("--t", type=int, default=None, help="only this time point (1-based)")
    reg.set_defaults(func=cmd_regions)

    rep = sub.add_parser("report", help="emit SVG plots with delimited-text twins")
    add_analysis(rep)
    rep.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (PanelValidationError, StoreError) as exc:
        print(f"data validation error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
