"""RBF-kernel soft-margin SVM trained by sequential minimal optimization.

Binary machines solve the dual

    max_a  sum(a) - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
    s.t.   0 <= a_i <= C,  sum_i a_i y_i = 0

two coordinates at a time. Multiclass problems use one machine per class
(one-vs-rest); prediction picks the class with the largest decision value.
"""

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._io import atomic_write_text
from .errors import DataError, InfeasibleError

MODEL_FORMAT = "tagsem-svm"
MODEL_VERSION = 1

# curvature floor for (near-)duplicate pairs, as in LIBSVM
_TAU = 1e-12


def rbf(x, y, gamma: float) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    d = x - y
    return float(np.exp(-gamma * np.dot(d, d)))


def rbf_matrix(X, Y, gamma: float) -> np.ndarray:
    """Kernel matrix ``K[i, j] = exp(-gamma * |X[i] - Y[j]|^2)``."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    sq = (X * X).sum(1)[:, None] + (Y * Y).sum(1)[None, :] - 2.0 * (X @ Y.T)
    return np.exp(-gamma * np.maximum(sq, 0.0))


@dataclass
class SmoResult:
    alpha: np.ndarray
    bias: float
    n_iter: int
    converged: bool
    gap: float
    objective: list = field(default_factory=list)


def dual_objective(alpha, y, K) -> float:
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def smo(K, y, C: float, tol: float = 1e-3, max_iter=None, trace: bool = False) -> SmoResult:
    """Solve one binary dual problem on a precomputed kernel matrix.

    The working pair is the first-order maximal violating pair: ``i`` is the
    worst KKT violator that can move up, and ``j`` is chosen among the
    coordinates that can move down to maximize ``|E_i - E_j|``. Iteration stops
    once that gap is at most ``tol``, which leaves every training point within
    ``tol`` of its KKT condition.

    ``y`` must hold +1/-1. With ``trace=True`` the dual objective is recorded
    after every update (plus the starting value 0).
    """
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    if max_iter is None:
        max_iter = max(10_000_000, 100 * n)
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of 1/2 a'Qa - sum(a), Q = yy'K
    diag = np.diag(K).copy()
    pos = y > 0
    objective = [0.0] if trace else []
    converged = False
    gap = np.inf
    it = 0
    while it < max_iter:
        v = -y * grad
        at_upper = alpha >= C
        at_lower = alpha <= 0
        up = np.where(pos, ~at_upper, ~at_lower)
        low = np.where(pos, ~at_lower, ~at_upper)
        i = int(np.argmax(np.where(up, v, -np.inf)))
        j = int(np.argmin(np.where(low, v, np.inf)))
        gap = v[i] - v[j]
        if gap <= tol:
            converged = True
            break
        it += 1
        eta = diag[i] + diag[j] - 2.0 * K[i, j]
        step = gap / max(eta, _TAU)
        room_i = C - alpha[i] if pos[i] else alpha[i]
        room_j = alpha[j] if pos[j] else C - alpha[j]
        t = min(step, room_i, room_j)
        new_i = alpha[i] + y[i] * t
        new_j = alpha[j] - y[j] * t
        if t == room_i:
            new_i = C if pos[i] else 0.0
        if t == room_j:
            new_j = 0.0 if pos[j] else C
        d_i, d_j = new_i - alpha[i], new_j - alpha[j]
        alpha[i], alpha[j] = new_i, new_j
        grad += y * (K[:, i] * (y[i] * d_i) + K[:, j] * (y[j] * d_j))
        if trace:
            objective.append(float(0.5 * (alpha.sum() - alpha @ grad)))

    v = -y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        bias = float(v[free].mean())
    else:
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        hi = v[up].max() if up.any() else v[low].min()
        lo = v[low].min() if low.any() else hi
        bias = float((hi + lo) / 2.0)
    if not converged:
        warnings.warn(f"SMO stopped after {it} iterations with gap {gap:.3g} > tol {tol:g}", RuntimeWarning)
    return SmoResult(alpha, bias, it, converged, float(gap), objective)


@dataclass(frozen=True, eq=False)
class BinarySvm:
    support_vectors: np.ndarray
    dual_coefs: np.ndarray  # alpha_i * y_i
    bias: float
    gamma: float
    C: float = np.inf

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if not len(self.dual_coefs):
            return np.full(len(X), self.bias)
        return rbf_matrix(X, self.support_vectors, self.gamma) @ self.dual_coefs + self.bias


@dataclass(frozen=True, eq=False)
class SvmModel:
    labels: tuple
    machines: tuple
    n_features: int

    @property
    def gamma(self) -> float:
        return self.machines[0].gamma

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        return np.column_stack([m.decision_function(X) for m in self.machines])

    def predict(self, X) -> list:
        scores = self.decision_function(X)
        return [self.labels[k] for k in np.argmax(scores, axis=1)]  # argmax keeps the first on ties


def _check_training_data(X, y):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("training data must be a non-empty 2-D array")
    if len(y) != X.shape[0]:
        raise ValueError(f"{X.shape[0]} samples but {len(y)} labels")
    if not np.all(np.isfinite(X)):
        raise ValueError("training data contains non-finite values")
    return X


def train_binary(X, y, C: float, gamma: float, tol: float = 1e-3, max_iter=None, K=None) -> BinarySvm:
    """Binary machine for labels given as +1/-1."""
    X = _check_training_data(X, y)
    y = np.asarray(y, dtype=np.float64)
    if not np.all(np.abs(y) == 1):
        raise ValueError("binary labels must be +1 or -1")
    if K is None:
        K = rbf_matrix(X, X, gamma)
    res = smo(K, y, C, tol, max_iter)
    sv = res.alpha > 0
    return BinarySvm(X[sv].copy(), (res.alpha * y)[sv], res.bias, gamma, C)


def train(X, y, C: float = 50.0, gamma: float = 1e-5, tol: float = 1e-3, max_iter=None) -> SvmModel:
    """One-vs-rest RBF SVM.

    Parameters
    ----------
    X : array-like, shape (n_samples, n_features)
    y : sequence of hashable labels
        At least two distinct labels. Classes are ordered by ``sorted``.
    C, gamma : float
        Box constraint and RBF width, both positive.
    tol : float
        Stopping tolerance on the maximal KKT violation.
    max_iter : int, optional
        Cap on SMO updates per machine.
    """
    X = _check_training_data(X, y)
    if not C > 0 or not gamma > 0:
        raise ValueError("C and gamma must be positive")
    labels = tuple(sorted(set(y)))
    if len(labels) < 2:
        raise InfeasibleError(f"training needs at least two classes, got {list(labels)}")
    K = rbf_matrix(X, X, gamma)
    y = np.asarray(y, dtype=object)
    machines = []
    for label in labels:
        y_bin = np.where(y == label, 1.0, -1.0)
        machines.append(train_binary(X, y_bin, C, gamma, tol, max_iter, K=K))
    return SvmModel(labels, tuple(machines), X.shape[1])


def predict(model: SvmModel, x):
    """Label of a single sample."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("predict takes one sample; use SvmModel.predict for batches")
    return model.predict(x[None, :])[0]


def dump_model(model: SvmModel) -> str:
    obj = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "gamma": model.gamma,
        "n_features": model.n_features,
        "labels": list(model.labels),
        "machines": [
            {
                "label": label,
                "C": m.C,
                "bias": m.bias,
                "dual_coefs": [float(a) for a in m.dual_coefs],
                "support_vectors": [[float(v) for v in row] for row in m.support_vectors],
            }
            for label, m in zip(model.labels, model.machines)
        ],
    }
    # repr-based float output is the shortest string that round-trips exactly
    return json.dumps(obj, indent=1) + "\n"


def save_model(model: SvmModel, path) -> Path:
    return atomic_write_text(path, dump_model(model))


def load_model(path) -> SvmModel:
    path = Path(path)
    if not path.is_file():
        raise DataError("model file not found", path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed model ({exc.msg})", path, exc.lineno) from None
    if not isinstance(obj, dict) or obj.get("format") != MODEL_FORMAT:
        raise DataError("not a model file", path)
    if obj.get("version") != MODEL_VERSION:
        raise DataError(f"unsupported model version {obj.get('version')!r}", path)
    try:
        gamma = float(obj["gamma"])
        n_features = int(obj["n_features"])
        labels = tuple(obj["labels"])
        machines = []
        for label, m in zip(labels, obj["machines"], strict=True):
            if m["label"] != label:
                raise ValueError("machine order does not match labels")
            sv = np.array(m["support_vectors"], dtype=np.float64).reshape(-1, n_features)
            coefs = np.array(m["dual_coefs"], dtype=np.float64)
            if len(coefs) != len(sv):
                raise ValueError("dual_coefs and support_vectors differ in length")
            machines.append(BinarySvm(sv, coefs, float(m["bias"]), gamma, float(m["C"])))
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed model ({exc})", path) from None
    if len(set(labels)) != len(labels):
        raise DataError("duplicate labels", path)
    return SvmModel(labels, tuple(machines), n_features)
