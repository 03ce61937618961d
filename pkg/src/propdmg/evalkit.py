"""Evaluation: confusion tables, regression summaries, permutation importance,
band-width sweep, sensor ablation and the leave-one-damage-out baseline."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import spearmanr

from .cascade import CascadeConfig, CascadeModel, train_loc_svm, train_tipcut_nn, train_type_svm
from .dataset import LabeledDataset, build_dataset, split_dataset
from .errors import ConfigError, DataError
from .flightlog import TYPE_NAMES
from .mlp import mlp_forward
from .spectral import SUPPORTED_WIDTHS, Standardizer, feature_groups, n_features
from .svm import LinearSvmModel, svm_train_multiclass

log = logging.getLogger(__name__)

POPULATIONS = ("test", "all")


# ---------------------------------------------------------------------------
# tables


@dataclass
class Table:
    columns: list
    rows: list
    title: str = ""

    def to_csv(self, stream=None, header_comment=None):
        out = stream or io.StringIO()
        if header_comment:
            for line in header_comment.splitlines():
                out.write(f"# {line}\n")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(v, csv_mode=True) for v in r])
        return out.getvalue() if stream is None else None

    def to_text(self):
        cells = [list(map(str, self.columns))] + [[_fmt(v) for v in r] for r in self.rows]
        widths = [max(len(row[i]) for row in cells) for i in range(len(self.columns))]
        lines = [self.title] if self.title else []
        for j, row in enumerate(cells):
            lines.append("  ".join(c.rjust(wd) if j else c.ljust(wd) for c, wd in zip(row, widths)).rstrip())
            if j == 0:
                lines.append("  ".join("-" * wd for wd in widths))
        return "\n".join(lines) + "\n"

    def to_dict(self):
        return {"title": self.title, "columns": list(self.columns), "rows": [[_jsonable(v) for v in r] for r in self.rows]}


def _fmt(v, csv_mode=False):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v)) if csv_mode else f"{float(v):.4f}"
    return str(v)


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


# ---------------------------------------------------------------------------
# confusion matrices


@dataclass
class ConfusionMatrix:
    labels: list
    counts: np.ndarray

    @property
    def percent(self):
        """Row-normalized percentages; empty rows stay zero."""
        tot = self.counts.sum(axis=1, keepdims=True).astype(np.float64)
        return np.divide(100.0 * self.counts, tot, out=np.zeros(self.counts.shape), where=tot > 0)

    @property
    def accuracy(self):
        n = self.counts.sum()
        return float(np.trace(self.counts) / n) if n else float("nan")

    def table(self, title=""):
        rows = [[str(lab)] + list(self.percent[i]) + [int(self.counts[i].sum())] for i, lab in enumerate(self.labels)]
        return Table(["true"] + [str(lab) for lab in self.labels] + ["n"], rows, title)


def confusion_matrix(true, pred, labels) -> ConfusionMatrix:
    labels = list(labels)
    index = {lab: i for i, lab in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in zip(np.asarray(true).tolist(), np.asarray(pred).tolist()):
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(labels, counts)


def _population(ds: LabeledDataset, population):
    if population not in POPULATIONS:
        raise ConfigError(f"population must be one of {POPULATIONS}")
    if population == "all":
        return np.ones(len(ds), dtype=bool)
    return ds.rows("test")


def predict_types(model: CascadeModel, X):
    return model.type_svm.predict_index(model.standardizer.apply(X))


@dataclass
class FlightConfusion:
    """Per-flight rows of predicted-class percentages."""

    labels: list
    keys: list
    damage: list
    counts: np.ndarray
    population: str

    @property
    def percent(self):
        return ConfusionMatrix(self.labels, self.counts).percent

    def row(self, key):
        return self.percent[self.keys.index(key)]

    def table(self):
        rows = [[k, d] + list(p) + [int(c.sum())] for k, d, p, c in zip(self.keys, self.damage, self.percent, self.counts)]
        title = f"damage-type classification per flight ({self.population} windows)"
        return Table(["flight", "damage"] + list(self.labels) + ["n"], rows, title)


def confusion_by_flight(model: CascadeModel, ds: LabeledDataset, population="test", group_by="flight") -> FlightConfusion:
    """Damage-type confusion with one row per flight (or per damage code).

    ``population="test"`` counts only test-split windows; ``"all"`` uses whole
    flights, train rows included.  Flights without windows in the population
    are skipped with a warning.
    """
    rows = _population(ds, population)
    pred = predict_types(model, ds.features[rows])
    keys_all = ds.flight_id if group_by == "flight" else ds.damage
    if group_by not in ("flight", "damage"):
        raise ConfigError("group_by must be 'flight' or 'damage'")
    keys = keys_all[rows]
    dmg = ds.damage[rows]
    out_keys, out_dmg, out_counts = [], [], []
    for k in sorted(set(keys_all.tolist())):
        sel = keys == k
        if not sel.any():
            log.warning("flight %s has no %s windows; skipped", k, population)
            continue
        out_keys.append(k)
        out_dmg.append(dmg[sel][0])
        out_counts.append(np.bincount(pred[sel], minlength=len(TYPE_NAMES)))
    return FlightConfusion(list(TYPE_NAMES), out_keys, out_dmg, np.array(out_counts), population)


def type_confusion(model: CascadeModel, ds: LabeledDataset, population="test") -> ConfusionMatrix:
    rows = _population(ds, population)
    pred = predict_types(model, ds.features[rows])
    return confusion_matrix(ds.type_labels[rows], pred, range(len(TYPE_NAMES)))


def localization_confusion(model: CascadeModel, ds: LabeledDataset, branch="tipcut", population="test") -> ConfusionMatrix:
    """Motor confusion of one branch's localizer on windows of that damage type.

    Windows are taken by their true type, so type-classifier errors do not
    leak into the localization figure.
    """
    t, svm = _branch(model, branch)[:2]
    rows = _population(ds, population) & (ds.type_labels == t)
    if not rows.any():
        raise DataError(f"no {branch} windows in the {population} population")
    pred = svm.predict(model.standardizer.apply(ds.features[rows]))
    return confusion_matrix(ds.motor_labels[rows], np.asarray(pred).astype(np.int64), svm.classes)


def opposite_mass(cm: ConfusionMatrix):
    """Off-diagonal counts on the opposite rotor and on the two neighbours."""
    n = len(cm.labels)
    opp = sum(int(cm.counts[i, (i + n // 2) % n]) for i in range(n))
    adj = sum(int(cm.counts[i, (i + 1) % n] + cm.counts[i, (i - 1) % n]) for i in range(n))
    return opp, adj


def _branch(model: CascadeModel, branch):
    if branch == "tipcut":
        return 1, model.tipcut_loc_svm, model.tipcut_nn
    if branch in ("long", "longitudinal"):
        return 2, model.long_loc_svm, model.long_nn
    raise ConfigError(f"unknown branch {branch!r}")


# ---------------------------------------------------------------------------
# regression


@dataclass
class RegressionSummary:
    outputs: list
    keys: list
    n: np.ndarray
    true: np.ndarray  # (groups, outputs)
    mean: np.ndarray
    std: np.ndarray
    population: str = "test"

    @property
    def error(self):
        return self.mean - self.true

    def table(self):
        cols = ["group", "n"]
        for o in self.outputs:
            cols += [f"{o}_true", f"{o}_mean", f"{o}_error", f"{o}_std"]
        rows = []
        for g, k in enumerate(self.keys):
            r = [k, int(self.n[g])]
            for j in range(len(self.outputs)):
                r += [self.true[g, j], self.mean[g, j], self.error[g, j], self.std[g, j]]
            rows.append(r)
        return Table(cols, rows, f"magnitude regression ({self.population} windows)")


def summarize_predictions(keys, truth, pred, outputs, population="test") -> RegressionSummary:
    keys = np.asarray(keys, dtype=object)
    truth = np.atleast_2d(np.asarray(truth, dtype=np.float64).T).T
    pred = np.atleast_2d(np.asarray(pred, dtype=np.float64).T).T
    groups = sorted(set(keys.tolist()), key=_damage_sort_key)
    n, tr, mu, sd = [], [], [], []
    for k in groups:
        sel = keys == k
        n.append(int(sel.sum()))
        tr.append(truth[sel].mean(axis=0))
        mu.append(pred[sel].mean(axis=0))
        sd.append(pred[sel].std(axis=0))
    return RegressionSummary(list(outputs), groups, np.array(n), np.array(tr), np.array(mu), np.array(sd), population)


def _damage_sort_key(k):
    s = str(k).split(".")[0].lstrip("L")
    a, _, b = s.partition("-")
    try:
        return (str(k).startswith("L"), float(a) + float(b), float(a), str(k))
    except ValueError:
        return (True, 0.0, 0.0, str(k))


def regression_summary(model: CascadeModel, ds: LabeledDataset, branch="tipcut", population="test", group_by="damage"):
    """Mean, error and spread of the raw branch-network outputs per group.

    Rows are selected by true damage type, so every window of the branch is
    scored even when the type classifier would have routed it elsewhere.
    """
    t, _, nn = _branch(model, branch)
    rows = _population(ds, population) & (ds.type_labels == t)
    if not rows.any():
        raise DataError(f"no {branch} windows to summarize")
    pred = mlp_forward(nn, model.standardizer.apply(ds.features[rows]))
    if t == 1:
        truth, outputs = np.column_stack([ds.sum_mm[rows], ds.diff_mm[rows]]), ["sum_mm", "diff_mm"]
    else:
        truth, outputs = ds.sum_mm[rows][:, None], ["sum_mm"]
    keys = (ds.damage if group_by == "damage" else ds.flight_id)[rows]
    return summarize_predictions(keys, truth, pred, outputs, population)


def sum_spearman(model: CascadeModel, ds: LabeledDataset, branch="tipcut", population="test"):
    t, _, nn = _branch(model, branch)
    rows = _population(ds, population) & (ds.type_labels == t)
    pred = mlp_forward(nn, model.standardizer.apply(ds.features[rows]))[:, 0]
    return float(spearmanr(pred, ds.sum_mm[rows])[0])


# ---------------------------------------------------------------------------
# permutation importance


@dataclass
class Importance:
    names: list
    mean: np.ndarray
    std: np.ndarray
    baseline: float
    metric: str
    columns: list = field(default_factory=list)

    def top(self, k=15):
        return list(zip(self.names[:k], self.mean[:k], self.std[:k]))

    def table(self, k=15):
        rows = [[i + 1, n, m, s] for i, (n, m, s) in enumerate(self.top(k))]
        return Table(["rank", "feature", "importance", "std"], rows, f"permutation importance ({self.metric}, baseline {self.baseline:.6g})")


def _metric_fn(metric):
    if metric == "accuracy":
        return lambda y, p: float(np.mean(np.asarray(y) == np.asarray(p)))
    if metric in ("mse", "MSE"):
        return lambda y, p: float(np.mean((np.asarray(y, dtype=np.float64) - np.asarray(p, dtype=np.float64)) ** 2))
    raise ConfigError(f"unknown metric {metric!r}; use 'accuracy' or 'mse'")


def _predictor(model):
    if isinstance(model, LinearSvmModel):
        return model.predict_index
    if hasattr(model, "layer_sizes"):
        return lambda X: mlp_forward(model, X)
    if callable(model):
        return model
    raise ConfigError("model must be a LinearSvmModel, an MlpModel or a callable")


def permutation_importance(model, X, y, metric="accuracy", repeats=5, seed=0, columns=None, names=None) -> Importance:
    """Mean metric degradation when one column at a time is shuffled.

    Degradation is ``baseline - shuffled`` for accuracy and ``shuffled -
    baseline`` for MSE, so larger is more important either way.  ``columns``
    restricts the scan (an empty list returns just the baseline).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.shape[0] < 2:
        raise DataError("permutation importance needs at least 2 rows")
    predict = _predictor(model)
    score = _metric_fn(metric)
    sign = 1.0 if metric == "accuracy" else -1.0
    baseline = score(y, predict(X))
    cols = list(range(X.shape[1])) if columns is None else list(columns)
    names = list(names) if names is not None else [f"f{j}" for j in range(X.shape[1])]
    rng = np.random.default_rng(seed)
    means, stds = [], []
    Xp = X.copy()
    for j in cols:
        drops = []
        for _ in range(repeats):
            Xp[:, j] = X[rng.permutation(X.shape[0]), j]
            drops.append(sign * (baseline - score(y, predict(Xp))))
        Xp[:, j] = X[:, j]
        means.append(np.mean(drops))
        stds.append(np.std(drops))
    means, stds = np.asarray(means), np.asarray(stds)
    order = np.argsort(-means, kind="stable")
    return Importance([names[cols[i]] for i in order], means[order], stds[order], baseline, metric, [cols[i] for i in order])


def cascade_importance(model: CascadeModel, ds: LabeledDataset, target="type", repeats=5, seed=0, population="test"):
    """Permutation importance of one cascade stage on standardized features."""
    from .spectral import feature_names

    names = feature_names(model.band_width_hz)
    rows = _population(ds, population)
    if target == "type":
        Z = model.standardizer.apply(ds.features[rows])
        return permutation_importance(model.type_svm, Z, ds.type_labels[rows], "accuracy", repeats, seed, names=names)
    t, svm, nn = _branch(model, target.replace("_loc", "").replace("_nn", ""))
    rows = rows & (ds.type_labels == t)
    Z = model.standardizer.apply(ds.features[rows])
    if target.endswith("_loc"):
        classes = np.asarray(svm.classes)
        y = np.searchsorted(classes, ds.motor_labels[rows])
        return permutation_importance(svm, Z, y, "accuracy", repeats, seed, names=names)
    Y = np.column_stack([ds.sum_mm[rows], ds.diff_mm[rows]]) if t == 1 else ds.sum_mm[rows][:, None]
    return permutation_importance(nn, Z, Y, "mse", repeats, seed, names=names)


# ---------------------------------------------------------------------------
# studies


def band_width_study(logs, widths=SUPPORTED_WIDTHS, seed=0, config: CascadeConfig | None = None) -> Table:
    """Retrain the damage-type SVM for each band width and report per-class test accuracy."""
    cfg = config or CascadeConfig(seed=seed)
    rows = []
    for bw in widths:
        if bw not in SUPPORTED_WIDTHS:
            raise ConfigError(f"unsupported band width {bw}")
        ds = split_dataset(build_dataset(logs, bw), seed)
        if ds.features.shape[1] != n_features(bw):
            raise DataError(f"bw={bw}: built {ds.features.shape[1]} features, law says {n_features(bw)}")
        tr, te = ds.rows("train"), ds.rows("test")
        if len(np.unique(ds.type_labels[tr])) < len(TYPE_NAMES):
            raise DataError("band-width study needs all three damage types")
        std = Standardizer().fit(ds.features[tr])
        svm, _ = train_type_svm(std.apply(ds.features[tr]), ds.type_labels[tr], cfg)
        pred = svm.predict_index(std.apply(ds.features[te]))
        cm = confusion_matrix(ds.type_labels[te], pred, range(len(TYPE_NAMES)))
        acc = np.diag(cm.percent)
        rows.append([bw, n_features(bw), *acc, cm.accuracy * 100.0])
        log.info("band width %d Hz: %s", bw, np.round(acc, 2))
    return Table(["band_width_hz", "n_features"] + [f"{n}_acc_pct" for n in TYPE_NAMES] + ["overall_pct"], rows, "damage-type accuracy vs band width")


ABLATION_MASKS = (
    ("full", ("acc", "gyro", "torque", "thrust")),
    ("acc+torque", ("acc", "torque")),
    ("gyro+torque", ("gyro", "torque")),
    ("acc+gyro", ("acc", "gyro")),
    ("acc", ("acc",)),
)


def ablation_study(ds: LabeledDataset, masks=ABLATION_MASKS, config: CascadeConfig | None = None, localization=False) -> Table:
    """Retrain the tip-cut network on sensor subsets and report test MSE.

    MSE is averaged over both outputs (sum and diff) and reported separately
    for symmetric and asymmetric windows, with deltas against the first mask.
    With ``localization=True`` the tip-cut localizer is retrained too.
    """
    cfg = config or CascadeConfig()
    if ds.split is None:
        ds = split_dataset(ds, cfg.seed)
    groups = feature_groups(ds.band_width_hz)
    tr, te = ds.rows("train"), ds.rows("test")
    std = Standardizer().fit(ds.features[tr])
    Z = std.apply(ds.features)
    tip_tr = tr & (ds.type_labels == 1)
    tip_te = te & (ds.type_labels == 1)
    sym = ds.symmetric
    results = []
    for name, gs in masks:
        if not gs:
            raise ConfigError(f"ablation mask {name!r} is empty")
        unknown = set(gs) - set(groups)
        if unknown:
            raise ConfigError(f"unknown feature groups {sorted(unknown)}")
        cols = sorted(c for g in gs for c in groups[g])
        Zc = Z[:, cols]
        nn = train_tipcut_nn(Zc, ds, tip_tr, cfg)
        pred = mlp_forward(nn, Zc[tip_te])
        truth = np.column_stack([ds.sum_mm[tip_te], ds.diff_mm[tip_te]])
        err = ((pred - truth) ** 2).mean(axis=1)
        s = sym[tip_te]
        row = [name, "+".join(gs), len(cols), float(err[s].mean()), float(err[~s].mean())]
        if localization:
            loc, _ = train_loc_svm(Zc[tip_tr], ds.motor_labels[tip_tr], cfg, cfg.seed + 3)
            p = np.asarray(loc.predict(Zc[tip_te])).astype(np.int64)
            row.append(float(np.mean(p == ds.motor_labels[tip_te]) * 100.0))
        results.append(row)
    base = results[0]
    rows = []
    for r in results:
        out = r[:5] + [r[3] - base[3], r[4] - base[4]]
        if localization:
            out += [r[5], r[5] - base[5]]
        rows.append(out)
    cols = ["mask", "groups", "n_features", "sym_mse", "asym_mse", "delta_sym", "delta_asym"]
    if localization:
        cols += ["loc_acc_pct", "delta_loc"]
    return Table(cols, rows, "tip-cut network MSE by sensor subset")


# ---------------------------------------------------------------------------
# leave-one-damage-out baseline


def class_weighted_cuts(pred_classes, class_cuts: dict):
    """``d_i = (1/N) * sum_j N_j * d_{i,j}`` over the predicted classes.

    ``class_cuts`` maps a class to its ``(d_1, d_2)`` cut lengths.
    """
    pred = list(pred_classes)
    if not pred:
        raise DataError("no predictions to average")
    labels, counts = np.unique(np.asarray(pred, dtype=object), return_counts=True)
    cuts = np.array([class_cuts[lab] for lab in labels], dtype=np.float64)
    return tuple(float(v) for v in counts @ cuts / counts.sum())


def nn_cuts(pred):
    """Per-window (sum, diff) to (smaller, larger) cut, averaged over windows."""
    pred = np.atleast_2d(np.asarray(pred, dtype=np.float64))
    s = pred[:, 0]
    d = np.clip(pred[:, 1], 0.0, np.maximum(s, 0.0))
    return float(np.mean((s - d) / 2.0)), float(np.mean((s + d) / 2.0))


def quadratic_expand(Z):
    """Degree-2 monomials: the inputs, their squares and all pairwise products."""
    n, p = Z.shape
    iu, ju = np.triu_indices(p)
    return np.hstack([Z, Z[:, iu] * Z[:, ju]])


@dataclass
class LooResult:
    held_out: str
    true_cuts: tuple
    svm_cuts: tuple
    nn_cuts: tuple
    svm_test_accuracy: float
    svm_class_counts: dict
    nn_sum_mean: float
    nn_diff_mean: float

    @property
    def svm_errors(self):
        return tuple(abs(a - b) for a, b in zip(self.svm_cuts, self.true_cuts))

    @property
    def nn_errors(self):
        return tuple(abs(a - b) for a, b in zip(self.nn_cuts, self.true_cuts))

    def table(self):
        rows = [
            ["quadratic SVM", self.svm_cuts[0], self.svm_cuts[1], self.svm_errors[0], self.svm_errors[1]],
            ["neural network", self.nn_cuts[0], self.nn_cuts[1], self.nn_errors[0], self.nn_errors[1]],
        ]
        return Table(["method", "d1_mm", "d2_mm", "d1_error", "d2_error"], rows, f"held-out damage {self.held_out}")


def loo_baseline(
    ds: LabeledDataset,
    held_out="20-20",
    seed=0,
    config: CascadeConfig | None = None,
    n_components=24,
    max_rows_per_class=1500,
    svm_tol=1e-5,
    svm_max_iter=500,
) -> LooResult:
    """Size an unseen tip-cut damage with a classifier versus the regressor.

    (a) A degree-2 polynomial SVM (explicit monomials of the leading
    ``n_components`` principal components, standardized) is trained on a
    70 % split of the other tip-cut damages; the held-out windows are
    classified and the cut lengths averaged with class-frequency weights.
    (b) The tip-cut network is retrained on the same 70 % rows and its mean
    prediction over the held-out windows converted to two cut lengths.
    """
    cfg = config or CascadeConfig(seed=seed)
    tip = ds.type_labels == 1
    dmg = ds.damage
    if held_out not in set(dmg[tip].tolist()):
        raise ConfigError(f"held-out class {held_out!r} is not a tip-cut damage in this dataset")
    rng = np.random.default_rng(seed)
    hold = tip & (dmg == held_out)
    rest = np.flatnonzero(tip & ~hold)
    rest = rest[rng.permutation(rest.size)]
    n_train = int(round(0.7 * rest.size))
    train_idx, test_idx = np.sort(rest[:n_train]), np.sort(rest[n_train:])

    std = Standardizer().fit(ds.features[train_idx])
    Z = std.apply(ds.features)
    # principal axes of the training rows
    _, _, vt = np.linalg.svd(Z[train_idx] - Z[train_idx].mean(axis=0), full_matrices=False)
    comps = vt[: min(n_components, vt.shape[0])]
    for c in comps:  # fix the sign of each axis for reproducibility
        if c[np.argmax(np.abs(c))] < 0:
            c *= -1.0
    P = (Z - Z[train_idx].mean(axis=0)) @ comps.T
    Q = quadratic_expand(P)
    qstd = Standardizer().fit(Q[train_idx])
    Qz = qstd.apply(Q)

    labels = dmg[train_idx]
    keep = []
    for lab in sorted(set(labels.tolist())):
        rows = train_idx[labels == lab]
        if rows.size > max_rows_per_class:
            rows = np.sort(rng.choice(rows, max_rows_per_class, replace=False))
        keep.append(rows)
    fit_idx = np.concatenate(keep)
    svm = svm_train_multiclass(Qz[fit_idx], dmg[fit_idx], cfg.C, svm_tol, svm_max_iter, seed, probability=False)
    test_acc = float(np.mean(np.asarray(svm.predict(Qz[test_idx])) == dmg[test_idx]))
    pred_hold = np.asarray(svm.predict(Qz[hold]))
    class_cuts = {}
    for lab in svm.classes:
        r = np.flatnonzero(dmg == lab)[0]
        class_cuts[lab] = (float(ds.cut1_mm[r]), float(ds.cut2_mm[r]))
    svm_cuts = class_weighted_cuts(pred_hold, class_cuts)
    counts = {str(k): int(v) for k, v in zip(*np.unique(pred_hold.astype(str), return_counts=True))}

    mask = np.zeros(len(ds), dtype=bool)
    mask[train_idx] = True
    nn = train_tipcut_nn(Z, ds, mask, cfg)
    out = mlp_forward(nn, Z[hold])
    r = np.flatnonzero(hold)[0]
    true = (float(ds.cut1_mm[r]), float(ds.cut2_mm[r]))
    return LooResult(held_out, true, svm_cuts, nn_cuts(out), test_acc, counts, float(out[:, 0].mean()), float(out[:, 1].mean()))


# ---------------------------------------------------------------------------
# headline numbers


def evaluate_cascade(model: CascadeModel, ds: LabeledDataset, population="test") -> dict:
    """The synthetic acceptance metrics in one dictionary."""
    rows = _population(ds, population)
    tcm = type_confusion(model, ds, population)
    pred = predict_types(model, ds.features[rows])
    tt, s = ds.type_labels[rows], ds.sum_mm[rows]
    big_tip = (tt == 1) & (s >= 30)
    out = {
        "type_accuracy": tcm.accuracy,
        "healthy_accuracy": float(np.mean(pred[tt == 0] == 0)),
        "tipcut_ge30_accuracy": float(np.mean(pred[big_tip] == 1)) if big_tip.any() else float("nan"),
        "longitudinal_accuracy": float(np.mean(pred[tt == 2] == 2)),
    }
    for branch in ("tipcut", "long"):
        cm = localization_confusion(model, ds, branch, population)
        opp, adj = opposite_mass(cm)
        out[f"{branch}_loc_accuracy"] = cm.accuracy
        out[f"{branch}_loc_opposite"] = opp
        out[f"{branch}_loc_adjacent"] = adj
    out["tipcut_sum_spearman"] = sum_spearman(model, ds, "tipcut", population)
    rs = regression_summary(model, ds, "tipcut", population)
    rel = [abs(e) / t for e, t in zip(rs.error[:, 0], rs.true[:, 0]) if t >= 30]
    out["tipcut_max_rel_sum_error_ge30"] = float(max(rel)) if rel else float("nan")
    return out
