"""Trainable components: Bernoulli naive Bayes, standardizer, linear SVM, Platt scaling.

Everything here is deterministic. The SVM is a sequential minimal optimization
solver for the soft-margin dual with a linear kernel; the calibrator is a
regularized maximum-likelihood sigmoid fit (Newton with backtracking).
Labels are +1 (abuse) / -1 (non-abuse) throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import FitError

try:  # compiled SMO inner loop; the numpy fallback is semantically identical
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

# ---- Bernoulli naive Bayes over token presence ----


@dataclass
class NBModel:
    vocab: dict[str, int]
    log_prior_pos: float
    log_prior_neg: float
    log_theta_pos: np.ndarray  # log P(token present | abuse)
    log_theta_neg: np.ndarray
    log_absent_pos: np.ndarray  # log(1 - theta)
    log_absent_neg: np.ndarray


def nb_train(token_lists: Sequence[Sequence[str]], labels: Sequence[int]) -> NBModel:
    """Laplace-smoothed (alpha=1) Bernoulli NB on binary presence vectors."""
    y = np.asarray(labels)
    n_pos = int((y > 0).sum())
    n_neg = int((y < 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise FitError("naive Bayes needs at least one document per class")
    vocab: dict[str, int] = {}
    for tokens in token_lists:
        for tok in tokens:
            if tok not in vocab:
                vocab[tok] = len(vocab)
    df_pos = np.zeros(len(vocab))
    df_neg = np.zeros(len(vocab))
    for tokens, label in zip(token_lists, y):
        table = df_pos if label > 0 else df_neg
        for idx in {vocab[t] for t in tokens}:
            table[idx] += 1
    theta_pos = (df_pos + 1.0) / (n_pos + 2.0)
    theta_neg = (df_neg + 1.0) / (n_neg + 2.0)
    n = n_pos + n_neg
    return NBModel(
        vocab=vocab,
        log_prior_pos=math.log(n_pos / n),
        log_prior_neg=math.log(n_neg / n),
        log_theta_pos=np.log(theta_pos),
        log_theta_neg=np.log(theta_neg),
        log_absent_pos=np.log1p(-theta_pos),
        log_absent_neg=np.log1p(-theta_neg),
    )


def nb_posterior(model: NBModel, tokens: Sequence[str]) -> float:
    """P(abuse | presence/absence over the vocabulary); unknown tokens ignored."""
    present = {model.vocab[t] for t in tokens if t in model.vocab}
    log_pos = model.log_prior_pos + model.log_absent_pos.sum()
    log_neg = model.log_prior_neg + model.log_absent_neg.sum()
    if present:
        idx = np.fromiter(present, dtype=int)
        log_pos += (model.log_theta_pos[idx] - model.log_absent_pos[idx]).sum()
        log_neg += (model.log_theta_neg[idx] - model.log_absent_neg[idx]).sum()
    # posterior = exp(log_pos) / (exp(log_pos) + exp(log_neg)); the log-odds
    # clamp keeps the result strictly inside (0,1) in float arithmetic
    delta = min(max(log_neg - log_pos, -36.0), 36.0)
    return float(1.0 / (1.0 + math.exp(delta)))


# ---- standardizer ----


@dataclass
class Scaler:
    mean: np.ndarray
    std: np.ndarray


def scaler_fit(X: np.ndarray) -> Scaler:
    X = np.asarray(X, dtype=float)
    return Scaler(mean=X.mean(axis=0), std=X.std(axis=0))


def scaler_apply(scaler: Scaler, X: np.ndarray) -> np.ndarray:
    """(x - mean) / std; zero-variance features map to 0 for any input."""
    X = np.asarray(X, dtype=float)
    safe = np.where(scaler.std > 0.0, scaler.std, 1.0)
    out = (X - scaler.mean) / safe
    return np.where(scaler.std > 0.0, out, 0.0)


# ---- linear soft-margin SVM via SMO ----


@dataclass
class SVMModel:
    w: np.ndarray
    b: float
    C: float
    alpha: np.ndarray  # dual variables, kept for diagnostics
    iterations: int
    gap: float


def _smo_pairs(K, kdiag, X, yv, pos, C, tol, max_iter, alpha, u, w):
    # Same maximal-violating-pair loop as the numpy fallback below, written
    # elementwise so numba can compile it. Tie-breaking must stay first-index
    # (strict > / <) to match np.argmax / np.argmin exactly.
    n = K.shape[0]
    d = X.shape[1]
    it = 0
    m = np.inf
    big_m = -np.inf
    for it in range(1, max_iter + 1):
        m = -np.inf
        big_m = np.inf
        i = 0
        j = 0
        for k in range(n):
            yg = yv[k] - u[k]
            if (pos[k] and alpha[k] < C) or ((not pos[k]) and alpha[k] > 0.0):
                if yg > m:
                    m = yg
                    i = k
            if ((not pos[k]) and alpha[k] < C) or (pos[k] and alpha[k] > 0.0):
                if yg < big_m:
                    big_m = yg
                    j = k
        if m - big_m <= tol:
            break
        quad = kdiag[i] + kdiag[j] - 2.0 * K[i, j]
        if quad < 1e-12:
            quad = 1e-12
        step = (m - big_m) / quad
        room_i = (C - alpha[i]) if pos[i] else alpha[i]
        room_j = alpha[j] if pos[j] else (C - alpha[j])
        if room_i < step:
            step = room_i
        if room_j < step:
            step = room_j
        alpha[i] += yv[i] * step
        alpha[j] -= yv[j] * step
        if step == room_i:
            alpha[i] = C if pos[i] else 0.0
        if step == room_j:
            alpha[j] = 0.0 if pos[j] else C
        for k in range(n):
            u[k] += step * (K[k, i] - K[k, j])
        for c in range(d):
            w[c] += step * (X[i, c] - X[j, c])
    return it, m, big_m


if _HAVE_NUMBA:
    _smo_pairs = njit(cache=True)(_smo_pairs)


def svm_train(
    X: np.ndarray,
    y: Sequence[int],
    C: float = 1.0,
    tol: float = 1e-8,
    max_iter: int = 100_000,
) -> SVMModel:
    """Minimize (1/2)|w|^2 + C * sum hinge via maximal-violating-pair SMO."""
    X = np.asarray(X, dtype=float)
    yv = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != yv.shape[0]:
        raise ValueError("X must be (n, d) with one label per row")
    if not np.isfinite(X).all():
        raise ValueError("non-finite feature values")
    if not ((yv > 0).any() and (yv < 0).any()):
        raise FitError("SVM needs both classes present")
    if C <= 0:
        raise ValueError("C must be positive")

    n = X.shape[0]
    K = X @ X.T
    kdiag = np.diag(K).copy()
    alpha = np.zeros(n)
    u = np.zeros(n)  # w . x_i, maintained incrementally
    w = np.zeros(X.shape[1])
    pos = yv > 0

    it = 0
    m = math.inf
    big_m = -math.inf
    if _HAVE_NUMBA:
        it, m, big_m = _smo_pairs(
            K, kdiag, X, yv, pos, float(C), float(tol), int(max_iter), alpha, u, w
        )
    else:
        for it in range(1, max_iter + 1):
            yg = yv - u
            up_mask = (pos & (alpha < C)) | (~pos & (alpha > 0.0))
            low_mask = (~pos & (alpha < C)) | (pos & (alpha > 0.0))
            m = float(np.max(np.where(up_mask, yg, -np.inf)))
            big_m = float(np.min(np.where(low_mask, yg, np.inf)))
            if m - big_m <= tol:
                break
            i = int(np.argmax(np.where(up_mask, yg, -np.inf)))
            j = int(np.argmin(np.where(low_mask, yg, np.inf)))
            quad = max(kdiag[i] + kdiag[j] - 2.0 * K[i, j], 1e-12)
            step = (m - big_m) / quad
            room_i = (C - alpha[i]) if pos[i] else alpha[i]
            room_j = alpha[j] if pos[j] else (C - alpha[j])
            step = min(step, room_i, room_j)
            # alpha_i moves toward its "up" bound, alpha_j toward its "low" bound
            alpha[i] += yv[i] * step
            alpha[j] -= yv[j] * step
            if step == room_i:
                alpha[i] = C if pos[i] else 0.0
            if step == room_j:
                alpha[j] = 0.0 if pos[j] else C
            u += step * (K[:, i] - K[:, j])
            w += step * (X[i] - X[j])

    yg = yv - u
    free = (alpha > 0.0) & (alpha < C)
    if free.any():
        b = float(yg[free].mean())
    else:
        b = float((m + big_m) / 2.0)
    return SVMModel(w=w, b=b, C=C, alpha=alpha, iterations=it, gap=float(m - big_m))


def svm_decision(model: SVMModel, X: np.ndarray) -> np.ndarray | float:
    """Margin w.x + b; accepts a single row or a matrix."""
    X = np.asarray(X, dtype=float)
    out = X @ model.w + model.b
    return float(out) if out.ndim == 0 else out


# ---- Platt sigmoid calibration ----


@dataclass
class Calibrator:
    A: float
    B: float


def _sigmoid_nll(decisions: np.ndarray, targets: np.ndarray, a: float, b: float) -> float:
    z = a * decisions + b
    # t*z + log(1+exp(-z)) computed on the stable side of each branch
    return float(
        np.sum(np.where(z >= 0, targets * z + np.log1p(np.exp(-z)),
                        (targets - 1.0) * z + np.log1p(np.exp(z))))
    )


def calibrate_fit(
    decisions: Sequence[float],
    labels: Sequence[int],
    tol: float = 1e-10,
    max_iter: int = 100,
) -> Calibrator:
    """Fit A, B of p(f) = 1/(1+exp(A*f+B)) by regularized Newton descent."""
    f = np.asarray(decisions, dtype=float)
    y = np.asarray(labels)
    n_pos = int((y > 0).sum())
    n_neg = int((y < 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise FitError("calibration needs both classes present")
    hi = (n_pos + 1.0) / (n_pos + 2.0)
    lo = 1.0 / (n_neg + 2.0)
    t = np.where(y > 0, hi, lo)
    sigma = 1e-12  # Hessian ridge
    a = 0.0
    b = math.log((n_neg + 1.0) / (n_pos + 1.0))
    fval = _sigmoid_nll(f, t, a, b)
    for _ in range(max_iter):
        z = a * f + b
        ez = np.exp(-np.abs(z))  # p(z) = 1/(1+e^z), stable on both sides
        p = np.where(z >= 0, ez / (1.0 + ez), 1.0 / (1.0 + ez))
        q = 1.0 - p
        d2 = p * q
        h11 = float(np.dot(f * f, d2)) + sigma
        h22 = float(d2.sum()) + sigma
        h21 = float(np.dot(f, d2))
        d1 = t - p
        g1 = float(np.dot(f, d1))
        g2 = float(d1.sum())
        if abs(g1) < tol and abs(g2) < tol:
            break
        det = h11 * h22 - h21 * h21
        da = -(h22 * g1 - h21 * g2) / det
        db = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * da + g2 * db
        stepsize = 1.0
        while stepsize >= 1e-10:
            na, nb = a + stepsize * da, b + stepsize * db
            nf = _sigmoid_nll(f, t, na, nb)
            if nf < fval + 1e-4 * stepsize * gd:
                a, b, fval = na, nb, nf
                break
            stepsize /= 2.0
        else:
            break  # line search exhausted
    return Calibrator(A=a, B=b)


def calibrator_apply(cal: Calibrator, decisions) -> np.ndarray | float:
    z = np.asarray(cal.A * np.asarray(decisions, dtype=float) + cal.B)
    ez = np.exp(-np.abs(z))
    out = np.where(z >= 0, ez / (1.0 + ez), 1.0 / (1.0 + ez))
    return float(out) if out.ndim == 0 else out


def predict_proba(model: SVMModel, cal: Calibrator, X: np.ndarray) -> np.ndarray | float:
    return calibrator_apply(cal, svm_decision(model, X))
