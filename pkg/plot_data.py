# -*- coding: utf-8 -*-
"""
绘图数据
========

Per-figure data tables from sweep records, plus optional PNG rendering.

Every table is whitespace-delimited text. Per-dataset tables hold one block
per dataset, blocks separated by two blank lines (gnuplot `index`, numpy
`loadtxt` per block). Inapplicable cells are written as `nan`.

    accuracy_vs_resolution.dat   accuracy per dataset
    weighted_accuracy.dat        N_q-weighted accuracy over all datasets
    vpr_time_vs_resolution.dat   t_vpr in ms per dataset
    ratio_vs_resolution.dat      accuracy / t_vpr per dataset
"""
import math
import os
from typing import Dict, List, Sequence, Tuple

from bench_config import log
from evaluation import BenchmarkRecord, RecordStatus, weighted_average_accuracy
from vpr_errors import ImageIoError

ACCURACY_TABLE = 'accuracy_vs_resolution.dat'
WEIGHTED_TABLE = 'weighted_accuracy.dat'
VPR_TIME_TABLE = 'vpr_time_vs_resolution.dat'
RATIO_TABLE = 'ratio_vs_resolution.dat'

TABLES = (ACCURACY_TABLE, WEIGHTED_TABLE, VPR_TIME_TABLE, RATIO_TABLE)

# (title, y label, log-scale y)
FIGURES = {
    ACCURACY_TABLE: ('Accuracy per dataset', 'accuracy', False),
    WEIGHTED_TABLE: ('Weighted average accuracy', 'accuracy', False),
    VPR_TIME_TABLE: ('VPR time per dataset', 't_vpr (ms)', True),
    RATIO_TABLE: ('Accuracy / VPR time', 'ratio (1/s)', True),
}


def _fmt(value: float, digits: int) -> str:
    return 'nan' if value is None or math.isnan(value) else f"{value:.{digits}f}"


def _block(title: str, techniques: Sequence[str], sides: Sequence[int],
           values: Dict[Tuple[str, int], float], digits: int) -> List[str]:
    lines = [f"# {title}", '# ' + ' '.join(['side'] + list(techniques))]
    for side in sides:
        cells = [_fmt(values.get((t, side), float('nan')), digits) for t in techniques]
        lines.append(' '.join([str(side)] + cells))
    return lines


def _write(path: str, blocks: List[List[str]]):
    text = '\n\n\n'.join('\n'.join(block) for block in blocks) + '\n'
    try:
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
    except OSError as e:
        raise ImageIoError(f"cannot write {path}: {e}") from e


def write_plot_tables(records: Sequence[BenchmarkRecord], out_dir: str) -> List[str]:
    """Write the four tables; returns their paths."""
    os.makedirs(out_dir, exist_ok=True)
    techniques = list(dict.fromkeys(r.technique for r in records))
    datasets = list(dict.fromkeys(r.dataset for r in records))
    sides = sorted({r.resolution.side for r in records})

    def per_dataset(metric, digits):
        blocks = []
        for dataset in datasets:
            values = {(r.technique, r.resolution.side): (metric(r) if r.status == RecordStatus.OK else float('nan'))
                      for r in records if r.dataset == dataset}
            blocks.append(_block(f"dataset {dataset}", techniques, sides, values, digits))
        return blocks

    weighted = {(t, res.side): value for (t, res), value in weighted_average_accuracy(records).items()}
    # a group where every dataset was inapplicable has no point
    for t, side in list(weighted):
        if all(r.status != RecordStatus.OK for r in records if r.technique == t and r.resolution.side == side):
            weighted[(t, side)] = float('nan')

    paths = []
    for name, blocks in (
            (ACCURACY_TABLE, per_dataset(lambda r: r.accuracy, 6)),
            (WEIGHTED_TABLE, [_block(f"weighted over {', '.join(datasets)}", techniques, sides, weighted, 6)]),
            (VPR_TIME_TABLE, per_dataset(lambda r: r.vpr_ms, 3)),
            (RATIO_TABLE, per_dataset(lambda r: r.ratio, 4))):
        path = os.path.join(out_dir, name)
        _write(path, blocks)
        paths.append(path)
    log("PlotData", f"Wrote {len(paths)} tables to {out_dir}")
    return paths


def read_table(path: str) -> List[Tuple[str, List[str], List[List[float]]]]:
    """Blocks of a table file as (title, column names, rows)."""
    with open(path, 'r', encoding='utf-8') as f:
        chunks = f.read().split('\n\n\n')
    blocks = []
    for chunk in chunks:
        lines = [line for line in chunk.splitlines() if line.strip()]
        if not lines:
            continue
        comments = [line[1:].strip() for line in lines if line.startswith('#')]
        rows = [[float(cell) for cell in line.split()] for line in lines if not line.startswith('#')]
        blocks.append((comments[0], comments[1].split(), rows))
    return blocks


def render_figures(tables_dir: str) -> List[str]:
    """Render every table found in tables_dir to a PNG next to it."""
    import matplotlib
    matplotlib.use('Agg')
    import matplotlib.pyplot as plt

    outputs = []
    for name in TABLES:
        path = os.path.join(tables_dir, name)
        if not os.path.isfile(path):
            continue
        title, ylabel, log_y = FIGURES[name]
        blocks = read_table(path)

        fig, axes = plt.subplots(1, len(blocks), figsize=(5 * len(blocks), 4), squeeze=False)
        for ax, (block_title, columns, rows) in zip(axes[0], blocks):
            sides = [row[0] for row in rows]
            for col, technique in enumerate(columns[1:], start=1):
                ax.plot(sides, [row[col] for row in rows], marker='o', label=technique)
            ax.set_xscale('log', base=2)
            ax.set_xticks(sides)
            ax.set_xticklabels([f"{int(s)}" for s in sides])
            if log_y:
                ax.set_yscale('log')
            ax.set_xlabel('resolution (px per side)')
            ax.set_ylabel(ylabel)
            ax.set_title(block_title, fontsize=10)
            ax.grid(True, alpha=0.3)
            ax.legend(fontsize=8)
        fig.suptitle(title, fontweight='bold')
        fig.tight_layout()

        out = os.path.splitext(path)[0] + '.png'
        fig.savefig(out, dpi=120)
        plt.close(fig)
        outputs.append(out)
    log("PlotData", f"Rendered {len(outputs)} figures in {tables_dir}")
    return outputs
