"""Losses on the additive margin F(x): value, gradient, diagonal hessian."""
import numpy as np
from scipy.special import expit, log_softmax, logsumexp, softmax


class LossSpec:
    """Base class. ``y`` holds targets (class indices for classification),
    ``F`` margins of shape ``(n,)`` or ``(n, K)``."""

    kind = ""
    n_outputs = 1

    def value(self, y, F):
        raise NotImplementedError

    def gradient(self, y, F):
        raise NotImplementedError

    def hessian(self, y, F):
        raise NotImplementedError

    def grad_hess(self, y, F):
        """Gradient and hessian together (subclasses share the work)."""
        return self.gradient(y, F), self.hessian(y, F)

    def init_constant(self, y):
        raise NotImplementedError

    def to_dict(self):
        return {"kind": self.kind}

    def __repr__(self):
        return f"{type(self).__name__}()"

    def __eq__(self, other):
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(str(self.to_dict()))


class SquaredLoss(LossSpec):
    kind = "squared"

    def value(self, y, F):
        return 0.5 * (np.asarray(y, dtype=float) - F) ** 2

    def gradient(self, y, F):
        return F - np.asarray(y, dtype=float)

    def hessian(self, y, F):
        return np.ones_like(F, dtype=float)

    def init_constant(self, y):
        return np.array([np.mean(y, dtype=float)])


class BinaryLogistic(LossSpec):
    kind = "binary_logistic"

    def value(self, y, F):
        # log(1 + e^F) - y F, stable for large |F|
        return np.logaddexp(0.0, F) - np.asarray(y, dtype=float) * F

    def gradient(self, y, F):
        return expit(F) - np.asarray(y, dtype=float)

    def hessian(self, y, F):
        p = expit(F)
        return p * (1.0 - p)

    def grad_hess(self, y, F):
        p = expit(F)
        return p - y, p * (1.0 - p)

    def init_constant(self, y):
        y = np.asarray(y)
        p = np.mean(y == 1)
        if p <= 0 or p >= 1:
            raise ValueError("both classes must be present to initialise a logistic model")
        return np.array([np.log(p / (1.0 - p))])

    def proba(self, F):
        p1 = expit(F.reshape(-1))
        return np.column_stack([1.0 - p1, p1])


class Softmax(LossSpec):
    kind = "softmax"

    def __init__(self, n_classes):
        if n_classes < 2:
            raise ValueError("softmax needs at least two classes")
        self.n_classes = int(n_classes)
        self.n_outputs = self.n_classes

    def __repr__(self):
        return f"Softmax({self.n_classes})"

    def to_dict(self):
        return {"kind": self.kind, "n_classes": self.n_classes}

    def _onehot(self, y):
        y = np.asarray(y, dtype=np.int64)
        out = np.zeros((y.shape[0], self.n_classes))
        out[np.arange(y.shape[0]), y] = 1.0
        return out

    def value(self, y, F):
        y = np.asarray(y, dtype=np.int64)
        return logsumexp(F, axis=1) - F[np.arange(F.shape[0]), y]

    def gradient(self, y, F):
        return softmax(F, axis=1) - self._onehot(y)

    def hessian(self, y, F):
        p = softmax(F, axis=1)
        return p * (1.0 - p)

    def grad_hess(self, y, F):
        p = softmax(F, axis=1)
        return p - self._onehot(y), p * (1.0 - p)

    def init_constant(self, y):
        counts = np.bincount(np.asarray(y, dtype=np.int64), minlength=self.n_classes)
        if np.any(counts == 0):
            raise ValueError("every class needs at least one training row")
        logp = np.log(counts / counts.sum())
        return logp - logp.mean()

    def proba(self, F):
        return np.exp(log_softmax(F, axis=1))


def loss_for_classes(n_classes: int) -> LossSpec:
    return BinaryLogistic() if n_classes == 2 else Softmax(n_classes)


def loss_from_dict(d) -> LossSpec:
    kind = d["kind"]
    if kind == "squared":
        return SquaredLoss()
    if kind == "binary_logistic":
        return BinaryLogistic()
    if kind == "softmax":
        return Softmax(d["n_classes"])
    raise ValueError(f"unknown loss {kind!r}")


def init_constant(labels, loss: LossSpec) -> np.ndarray:
    """Constant margin minimising the summed loss over ``labels``."""
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("labels must be non-empty")
    return loss.init_constant(labels)


def pseudo_residuals(labels, margins, loss: LossSpec) -> np.ndarray:
    """Negative loss gradient at the current margins."""
    return -loss.gradient(labels, np.asarray(margins, dtype=float))
