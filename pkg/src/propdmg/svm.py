"""Linear soft-margin SVM: dual coordinate descent, one-vs-rest, Platt probabilities.

The bias is learned as the weight of a constant input feature (value 1), so
it is regularized together with ``w``.  Training data is put into a
canonical row order first, which makes fitted models independent of the
order in which rows arrive.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DataError, SchemaError

log = logging.getLogger(__name__)

SCHEMA = "linear-svm-ovr-v1"
BIAS_SCALE = 1.0


def _canonical_order(X, y):
    keys = [y] + [X[:, j] for j in range(X.shape[1] - 1, -1, -1)]
    return np.lexsort(keys[::-1])


def _check_X(X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DataError("X must be 2-D")
    if not np.isfinite(X).all():
        raise DataError("features contain non-finite values")
    return X


def svm_train_binary(X, y, C: float = 1.0, tol: float = 1e-4, max_iter: int = 2000, seed: int = 0):
    """Fit ``(w, b)`` for labels in {-1, +1}.

    Coordinate descent on the dual stops once the spread of the projected
    gradient falls below ``tol`` (the KKT conditions hold to that tolerance).
    """
    X = _check_X(X)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (X.shape[0],) or not np.all(np.isin(y, (-1.0, 1.0))):
        raise DataError("y must hold one label in {-1, +1} per row")
    if not ((y > 0).any() and (y < 0).any()):
        raise DataError("binary SVM training needs samples of both signs")
    order = _canonical_order(X, y)
    Xa = np.hstack([X[order], np.full((X.shape[0], 1), BIAS_SCALE)])
    w, _, iters, gap = _kernels.dual_cd(Xa, y[order], C, tol, max_iter, seed)
    if gap > tol:
        log.info("dual CD stopped after %d sweeps with KKT gap %.3g > tol %.3g", iters, gap, tol)
    return w[:-1].copy(), float(w[-1] * BIAS_SCALE)


def hinge_objective(X, y, w, b, C):
    """Primal objective with the regularized bias used by the solver."""
    m = 1.0 - y * (np.asarray(X) @ w + b)
    return 0.5 * (w @ w + (b / BIAS_SCALE) ** 2) + C * np.maximum(m, 0.0).sum()


def platt_fit(dec, labels, max_iter: int = 100):
    """Sigmoid ``P(y=1|f) = 1 / (1 + exp(A f + B))`` by regularized likelihood.

    Newton's method with backtracking on smoothed targets
    (``(N+ + 1)/(N+ + 2)`` and ``1/(N- + 2)``).
    """
    dec = np.asarray(dec, dtype=np.float64)
    pos = np.asarray(labels) > 0
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    t = np.where(pos, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))
    A, B = 0.0, float(np.log((n_neg + 1.0) / (n_pos + 1.0)))
    sigma, min_step, eps = 1e-12, 1e-10, 1e-5

    def objective(A, B):
        fApB = dec * A + B
        return float(np.sum(np.where(fApB >= 0, t * fApB + np.log1p(np.exp(-np.abs(fApB))), (t - 1) * fApB + np.log1p(np.exp(-np.abs(fApB))))))

    fval = objective(A, B)
    for _ in range(max_iter):
        fApB = dec * A + B
        e = np.exp(-np.abs(fApB))
        p = np.where(fApB >= 0, e / (1.0 + e), 1.0 / (1.0 + e))
        q = 1.0 - p
        d2 = p * q
        h11 = sigma + np.sum(dec * dec * d2)
        h22 = sigma + np.sum(d2)
        h21 = np.sum(dec * d2)
        d1 = t - p
        g1 = np.sum(dec * d1)
        g2 = np.sum(d1)
        if abs(g1) < eps and abs(g2) < eps:
            break
        det = h11 * h22 - h21 * h21
        dA = -(h22 * g1 - h21 * g2) / det
        dB = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * dA + g2 * dB
        step = 1.0
        while step >= min_step:
            nA, nB = A + step * dA, B + step * dB
            nf = objective(nA, nB)
            if nf < fval + 1e-4 * step * gd:
                A, B, fval = nA, nB, nf
                break
            step /= 2.0
        else:
            break
    return float(A), float(B)


def _sigmoid_prob(f, A, B):
    z = f * A + B
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, e / (1.0 + e), 1.0 / (1.0 + e))


@dataclass
class LinearSvmModel:
    classes: list
    W: np.ndarray  # (n_classes, d)
    b: np.ndarray  # (n_classes,)
    A: np.ndarray
    B: np.ndarray
    hyperparams: dict = field(default_factory=dict)

    @property
    def n_features(self):
        return self.W.shape[1]

    def decision_function(self, X):
        X = np.asarray(getattr(X, "values", X), dtype=np.float64)
        single = X.ndim == 1
        X2 = np.atleast_2d(X)
        if X2.shape[1] != self.n_features:
            raise SchemaError(f"model expects {self.n_features} features, got {X2.shape[1]}")
        s = X2 @ self.W.T + self.b
        return s[0] if single else s

    def predict_proba(self, X):
        s = self.decision_function(X)
        p = _sigmoid_prob(s, self.A, self.B)
        p = np.clip(p, 1e-300, None)
        return p / p.sum(axis=-1, keepdims=True)

    def predict_index(self, X):
        return np.argmax(self.predict_proba(X), axis=-1)

    def predict(self, X):
        idx = self.predict_index(X)
        return np.asarray(self.classes, dtype=object)[idx] if np.ndim(idx) else self.classes[int(idx)]

    def to_dict(self):
        return {
            "schema_id": SCHEMA,
            "classes": list(self.classes),
            "per_class": [
                {"w": self.W[i].tolist(), "b": float(self.b[i]), "A": float(self.A[i]), "B": float(self.B[i])}
                for i in range(len(self.classes))
            ],
            "hyperparams": dict(self.hyperparams),
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("schema_id") != SCHEMA:
            raise SchemaError(f"not a linear SVM document: {d.get('schema_id')!r}")
        pc = d["per_class"]
        return cls(
            list(d["classes"]),
            np.array([c["w"] for c in pc], dtype=np.float64),
            np.array([c["b"] for c in pc], dtype=np.float64),
            np.array([c["A"] for c in pc], dtype=np.float64),
            np.array([c["B"] for c in pc], dtype=np.float64),
            dict(d.get("hyperparams", {})),
        )


def _ovr_fit(X, yidx, n_classes, C, tol, max_iter, seed):
    if n_classes == 2:
        w, b = svm_train_binary(X, np.where(yidx == 1, 1.0, -1.0), C, tol, max_iter, seed)
        return np.vstack([-w, w]), np.array([-b, b])
    W = np.empty((n_classes, X.shape[1]))
    bias = np.empty(n_classes)
    for c in range(n_classes):
        W[c], bias[c] = svm_train_binary(X, np.where(yidx == c, 1.0, -1.0), C, tol, max_iter, seed + c)
    return W, bias


def _stratified_folds(yidx, n_folds, seed):
    rng = np.random.default_rng(seed)
    fold = np.empty(yidx.shape[0], dtype=np.int64)
    for c in np.unique(yidx):
        rows = np.flatnonzero(yidx == c)
        rows = rows[rng.permutation(rows.size)]
        fold[rows] = np.arange(rows.size) % n_folds
    return fold


def svm_train_multiclass(
    X,
    labels,
    C: float = 1.0,
    tol: float = 1e-4,
    max_iter: int = 2000,
    seed: int = 0,
    probability: bool = True,
    n_folds: int = 3,
) -> LinearSvmModel:
    """One-vs-rest linear SVMs with per-class Platt sigmoids.

    The sigmoids are fitted on out-of-fold decision values (``n_folds``-fold,
    stratified).  With ``probability=False`` they are left at ``A=-1, B=0``,
    which keeps argmax predictions equal to the raw scores' argmax.
    """
    X = _check_X(X)
    labels = np.asarray(labels)
    if labels.shape[0] != X.shape[0]:
        raise DataError("one label per row is required")
    classes = sorted(np.unique(labels).tolist())
    if len(classes) < 2:
        raise DataError("multiclass SVM needs at least two classes")
    yidx = np.searchsorted(np.asarray(classes), labels)
    counts = np.bincount(yidx, minlength=len(classes))
    order = _canonical_order(X, yidx)
    X, yidx = X[order], yidx[order]

    W, bias = _ovr_fit(X, yidx, len(classes), C, tol, max_iter, seed)
    n_cls = len(classes)
    A = np.full(n_cls, -1.0)
    B = np.zeros(n_cls)
    if probability:
        if counts.min() < n_folds:
            raise DataError(f"every class needs at least {n_folds} samples for probability calibration")
        fold = _stratified_folds(yidx, n_folds, seed)
        oof = np.empty((X.shape[0], n_cls))
        for f in range(n_folds):
            tr, te = fold != f, fold == f
            if np.unique(yidx[tr]).size < n_cls:
                raise DataError("a calibration fold lost a class")
            Wf, bf = _ovr_fit(X[tr], yidx[tr], n_cls, C, tol, max_iter, seed + 101 * (f + 1))
            oof[te] = X[te] @ Wf.T + bf
        if n_cls == 2:
            a, bb = platt_fit(oof[:, 1], yidx == 1)
            A[:] = a
            B[:] = (-bb, bb)
        else:
            for c in range(n_cls):
                A[c], B[c] = platt_fit(oof[:, c], yidx == c)
    hyper = {"C": float(C), "tol": float(tol), "max_iter": int(max_iter), "seed": int(seed), "probability": bool(probability)}
    return LinearSvmModel(classes, W, bias, A, B, hyper)


def svm_predict(model: LinearSvmModel, x):
    return model.predict(x)


def svm_predict_proba(model: LinearSvmModel, x):
    return model.predict_proba(x)
