"""Experiment runners: the DLA/LSTM comparison, the skip-sequence sweep and
the learning-extent sweep.

Scoring protocol for every DLA run: the (skip-reduced) encoded stream is
learned online with :func:`run_episode`, then every observation of the full
stream is recalled from the resulting memory with :func:`replay`, and the
decoded recalls are scored against the decoded observations with MAPCA. The
trend series records the first unit of each online prediction.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import lstm_baseline as lstm
from .classifier import MapcaReport, assign_label, mapca
from .dataset_io import (
    ExemplarSet, bundled_threat_sample, format_value, load_csv, synth_incident_set,
)
from .dla_core import DlaConfig, MemoryStore, Prediction, replay, run_episode
from .representation import EncoderConfig, decode, encode, retained_indices


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: int = 1
    # "bundled", "synth", or a CSV path; empty picks the experiment's default
    dataset: str = ""
    has_header: bool = False
    synth_n: int = 190
    synth_arity: int = 10
    synth_classes: int = 4
    synth_jitter: int = 3
    scale_digits: int = 2
    learning_extent: int = 121
    time_limit: int = 10
    store_threshold: int = 120
    initial_permanence: float = 0.0
    tolerance: float = 0.05
    sks_sweep: tuple[int, ...] = (1, 5, 10)
    extent_sweep: tuple[int, ...] = (60, 80, 100)
    lstm_hidden: int = 20
    lstm_vocab: int = 5
    lstm_learning_rate: float = 0.01
    lstm_l2_strength: float = 1e-6
    lstm_clip_value: float = 0.05
    lstm_softmax_temperature: float = 0.1
    lstm_epochs: int = 300
    seed: int = 7
    out: str = "runs"
    svg: bool = False

    def __post_init__(self):
        if self.experiment not in (1, 2, 3):
            raise ConfigError(f"experiment must be 1, 2 or 3, got {self.experiment}")
        self.sks_sweep = tuple(int(v) for v in self.sks_sweep)
        self.extent_sweep = tuple(int(v) for v in self.extent_sweep)
        if self.experiment == 2 and (not self.sks_sweep or min(self.sks_sweep) < 1):
            raise ConfigError(f"sks_sweep must be nonempty with values >= 1, got {self.sks_sweep}")
        if self.experiment == 3 and (not self.extent_sweep or min(self.extent_sweep) < 1):
            raise ConfigError(f"extent_sweep must be nonempty with values >= 1, got {self.extent_sweep}")
        try:
            self.dla_config()
            self.encoder_config()
            self.lstm_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def dataset_source(self) -> str:
        if self.dataset:
            return self.dataset
        return "bundled" if self.experiment == 1 else "synth"

    def dla_config(self) -> DlaConfig:
        return DlaConfig(self.learning_extent, self.time_limit, self.store_threshold,
                         self.initial_permanence, self.tolerance)

    def encoder_config(self) -> EncoderConfig:
        return EncoderConfig(self.scale_digits)

    def lstm_config(self) -> lstm.LstmTrainConfig:
        return lstm.LstmTrainConfig(self.lstm_learning_rate, self.lstm_l2_strength, self.lstm_clip_value,
                                    self.lstm_softmax_temperature, self.lstm_epochs, self.seed)

    def canonical(self) -> str:
        """Sorted ``key = value`` text of every field except the output location."""
        lines = []
        for f in sorted(dataclasses.fields(self), key=lambda f: f.name):
            if f.name == "out":
                continue
            lines.append(f"{f.name} = {_format_field(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


def _format_field(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ",".join(str(x) for x in v)
    return str(v)


def _coerce(name: str, text: str, default):
    text = text.strip()
    try:
        if isinstance(default, bool):
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return low in ("true", "1", "yes")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"bad value for {name}: {text!r}") from None
    return text


_DEFAULTS = {f.name: f.default for f in dataclasses.fields(ExperimentConfig)}


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, value, _DEFAULTS[key])
    return values


def load_config(path=None, **overrides) -> ExperimentConfig:
    values = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            values = parse_config_text(fh.read())
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


def resolve_dataset(cfg: ExperimentConfig) -> ExemplarSet:
    source = cfg.dataset_source
    if source == "bundled":
        return bundled_threat_sample()
    if source == "synth":
        return synth_incident_set(cfg.synth_n, cfg.synth_arity, cfg.synth_classes, cfg.seed,
                                  jitter_units=cfg.synth_jitter)
    return load_csv(source, has_header=cfg.has_header)


# -- trend series -----------------------------------------------------------

@dataclass(frozen=True)
class TrendSeries:
    label: str
    points: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        pts = tuple((int(s), int(v)) for s, v in self.points)
        for (a, _), (b, _) in zip(pts, pts[1:]):
            if b <= a:
                raise ValueError(f"trend steps must be strictly increasing ({a} then {b})")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)


def emit_trend(series: TrendSeries, path, svg: bool = False) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("step,value\n")
        for step, value in series.points:
            fh.write(f"{step},{value}\n")
    if svg:
        path.with_suffix(".svg").write_text(render_svg(series), encoding="utf-8")
    return path


def parse_trend(path, label: str | None = None) -> TrendSeries:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "step,value":
            raise ValueError(f"{path}: bad trend header {header!r}")
        points = [tuple(int(x) for x in ln.split(",")) for ln in fh if ln.strip()]
    return TrendSeries(label if label is not None else path.stem, tuple(points))


def render_svg(series: TrendSeries, width: int = 640, height: int = 240, pad: int = 30) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">\n'
            f'<rect width="{width}" height="{height}" fill="white"/>\n'
            f'<text x="{pad}" y="{pad - 10}" font-family="sans-serif" font-size="12">{series.label}</text>\n')
    if not series.points:
        return head + "</svg>\n"
    xs = [s for s, _ in series.points]
    ys = [v for _, v in series.points]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    sx = (width - 2 * pad) / ((x1 - x0) or 1)
    sy = (height - 2 * pad) / ((y1 - y0) or 1)
    coords = " ".join(f"{pad + (x - x0) * sx:.2f},{height - pad - (y - y0) * sy:.2f}" for x, y in zip(xs, ys))
    axes = (f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>\n'
            f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>\n')
    return head + axes + f'<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{coords}"/>\n</svg>\n'


# -- DLA evaluation -----------------------------------------------------------

@dataclass
class DlaRun:
    online: list[Prediction]
    recalls: list[Prediction]
    retained: list[int]
    trend: TrendSeries
    score: MapcaReport


def evaluate_dla(data: ExemplarSet, dla_cfg: DlaConfig, enc_cfg: EncoderConfig = EncoderConfig(),
                 sks: int = 1, label: str = "dla") -> DlaRun:
    chunks = [encode(ex.features, enc_cfg) for ex in data]
    retained = retained_indices(len(chunks), sks)
    store = MemoryStore(dla_cfg)
    online = run_episode(store, [chunks[i] for i in retained])
    trend = TrendSeries(label, tuple((retained[k + 1], p.selected[0]) for k, p in enumerate(online)))
    recalls = replay(store, chunks)
    y = [decode(c, enc_cfg) for c in chunks]
    yhat = [decode(p.selected, enc_cfg) for p in recalls]
    return DlaRun(online, recalls, retained, trend, mapca(y, yhat, dla_cfg.tolerance))


@dataclass
class SweepReport:
    parameter: str
    rows: tuple[tuple[int, float], ...]
    seed: int
    config_hash: str
    trend_files: tuple[str, ...] = ()
    details: tuple[MapcaReport, ...] = field(default=(), repr=False)

    def table(self) -> str:
        head = f"{'':<22}" + "".join(f"{self.parameter} = {v:<8}" for v, _ in self.rows)
        vals = f"{'Percent accuracy (%)':<22}" + "".join(f"{acc:<{len(self.parameter) + 11}.4f}" for _, acc in self.rows)
        return head.rstrip() + "\n" + vals.rstrip() + "\n"


def _experiment_dir(cfg: ExperimentConfig) -> Path:
    d = Path(cfg.out) / f"exp{cfg.experiment}"
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_sweep(cfg: ExperimentConfig, report: SweepReport, trends: Sequence[TrendSeries], outdir: Path):
    files = []
    for series in trends:
        files.append(emit_trend(series, outdir / f"{series.label}.csv", svg=cfg.svg).name)
    report.trend_files = tuple(files)
    with open(outdir / "sweep.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("parameter,value,mapca_percent,hits,n_z,trend_file\n")
        for (value, acc), det, name in zip(report.rows, report.details, files):
            fh.write(f"{report.parameter},{value},{acc:.4f},{det.hits},{det.n_z},{name}\n")
    _write_metadata(cfg, outdir, {"parameter": report.parameter,
                                  "rows": [[v, round(a, 4)] for v, a in report.rows]})
    (outdir / "table.txt").write_text(report.table(), encoding="utf-8")


def _write_metadata(cfg: ExperimentConfig, outdir: Path, extra: dict):
    meta = {"experiment": cfg.experiment, "seed": cfg.seed, "config_hash": cfg.config_hash(),
            "dataset": cfg.dataset_source, **extra}
    (outdir / "config.txt").write_text(cfg.canonical(), encoding="utf-8")
    (outdir / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def run_experiment2(cfg: ExperimentConfig, write: bool = True):
    """Skip-sequence sweep at fixed learning extent."""
    data = resolve_dataset(cfg)
    rows, details, trends = [], [], []
    for s in cfg.sks_sweep:
        if s < 1:
            raise ConfigError(f"invalid SKS value {s}")
        run = evaluate_dla(data, cfg.dla_config(), cfg.encoder_config(), sks=s, label=f"trend_sks_{s}")
        rows.append((s, run.score.accuracy_percent))
        details.append(run.score)
        trends.append(run.trend)
    report = SweepReport("SKS", tuple(rows), cfg.seed, cfg.config_hash(), details=tuple(details))
    if write:
        _write_sweep(cfg, report, trends, _experiment_dir(cfg))
    return report, trends


def run_experiment3(cfg: ExperimentConfig, write: bool = True):
    """Learning-extent sweep with SKS fixed at 1."""
    data = resolve_dataset(cfg)
    rows, details, trends = [], [], []
    for ext in cfg.extent_sweep:
        if ext < 1:
            raise ConfigError(f"invalid learning extent {ext}")
        dla_cfg = dataclasses.replace(cfg.dla_config(), learning_extent=ext)
        run = evaluate_dla(data, dla_cfg, cfg.encoder_config(), sks=1, label=f"trend_lext_{ext}")
        rows.append((ext, run.score.accuracy_percent))
        details.append(run.score)
        trends.append(run.trend)
    report = SweepReport("l_ext", tuple(rows), cfg.seed, cfg.config_hash(), details=tuple(details))
    if write:
        _write_sweep(cfg, report, trends, _experiment_dir(cfg))
    return report, trends


# -- experiment 1 --------------------------------------------------------------

@dataclass
class ComparisonReport:
    dla_rows: list[tuple[str, list[float]]]
    lstm_rows: list[tuple[str, list[float]]]
    dla_score: MapcaReport
    lstm_loss: list[float]

    def text(self) -> str:
        def block(title, rows):
            out = [f"{title}:"]
            out += ["\t".join([label, *map(format_value, feats)]) for label, feats in rows]
            return out
        lines = block("DLA", self.dla_rows) + block("LSTM", self.lstm_rows)
        lines.append(f"rows: DLA={len(self.dla_rows)} LSTM={len(self.lstm_rows)}")
        lines.append(f"DLA MAPCA: {self.dla_score.accuracy_percent:.4f}% "
                     f"({self.dla_score.hits}/{self.dla_score.n_z}, tol={format_value(self.dla_score.tol)})")
        return "\n".join(lines) + "\n"


def lstm_predict_row(data: ExemplarSet, cfg: ExperimentConfig):
    """Train the baseline on the tokenized rows and sample one row primed with
    the first token of the most recent exemplar."""
    tok = lstm.BinTokenizer.fit(data.feature_matrix(), n_bins=cfg.lstm_vocab)
    corpus = [tok.tokenize(ex.features) for ex in data]
    params = lstm.init_params(cfg.lstm_hidden, cfg.lstm_vocab, seed=cfg.seed)
    train_cfg = cfg.lstm_config()
    params, trace = lstm.train(params, corpus, train_cfg)
    prime = corpus[-1][:1]
    tokens = prime + lstm.sample(params, prime, data.arity - 1, train_cfg.softmax_temperature, seed=cfg.seed)
    feats = tok.detokenize(tokens)
    return params, trace, (assign_label(feats, data), feats)


def run_experiment1(cfg: ExperimentConfig, write: bool = True) -> ComparisonReport:
    """DLA multi-candidate recall versus LSTM sampling on the same rows."""
    data = resolve_dataset(cfg)
    enc_cfg = cfg.encoder_config()
    run = evaluate_dla(data, cfg.dla_config(), enc_cfg)
    dla_rows = []
    for pred in run.recalls:
        for cand in pred.candidates:
            feats = decode(cand, enc_cfg)
            dla_rows.append((assign_label(feats, data), feats))
    params, trace, lstm_row = lstm_predict_row(data, cfg)
    report = ComparisonReport(dla_rows, [lstm_row], run.score, trace)
    if write:
        outdir = _experiment_dir(cfg)
        (outdir / "report.txt").write_text(report.text(), encoding="utf-8")
        params.save(outdir / "lstm_params.txt")
        with open(outdir / "lstm_loss.csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("epoch,loss\n")
            fh.writelines(f"{k},{v!r}\n" for k, v in enumerate(trace, start=1))
        _write_metadata(cfg, outdir, {"dla_rows": len(dla_rows), "lstm_rows": 1,
                                      "dla_mapca": round(run.score.accuracy_percent, 4)})
    return report


RUNNERS = {1: run_experiment1, 2: run_experiment2, 3: run_experiment3}


def run(cfg: ExperimentConfig, write: bool = True):
    return RUNNERS[cfg.experiment](cfg, write=write)

