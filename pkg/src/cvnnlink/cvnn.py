"""Complex-valued neural networks with online steepest-descent training.

Five architectures share one state/update machinery:

* ``cvfnn``  -- fully complex feedforward net, atanh hidden activation
  (principal complex branch), linear output layer.
* ``scfnn``  -- split-complex feedforward net, tanh applied separately to
  the real and imaginary parts of the hidden pre-activation.
* ``crbf``   -- Gaussian kernels of the complex Euclidean distance
  (real-valued, phase-blind), linear readout with bias.
* ``fcrbf``  -- fully complex sech kernels of upsilon^T (x - gamma)
  (plain transpose, no conjugation), linear readout without bias.
* ``ptrbf``  -- split Gaussian kernels: real and imaginary exponents are
  driven by the real and imaginary distances and variances separately.

Gradient convention: for a complex tensor the stored gradient is the
conjugate-coordinate (Wirtinger) derivative dE/d(conj theta), whose real
and imaginary parts are half the plain real-coordinate derivatives; for
a real tensor it is the ordinary derivative.  The update for every
trainable tensor is classical momentum on the steepest-descent step,

    delta[k] = alpha * delta[k-1] - eta * grad,   theta += delta[k],

with kernel variances clamped to their epsilon floor after each step.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from typing import NamedTuple

import numpy as np

from .numerics import Rng, sample_cgauss

__all__ = [
    "ARCHITECTURES",
    "NetworkConfig",
    "Hyperparameters",
    "NetworkState",
    "NumericDomainError",
    "default_hidden_width",
    "default_hyperparameters",
    "init_network",
    "forward",
    "gradients",
    "train_step",
    "numeric_gradient",
    "gradient_check",
    "ComplexityCount",
    "complexity",
    "save_state",
    "load_state",
]

ARCHITECTURES = ("cvfnn", "scfnn", "crbf", "fcrbf", "ptrbf")

# Trainable tensors per architecture, in a fixed order (also the rng draw
# order at init, so states are reproducible).
_PARAM_KEYS = {
    "cvfnn": ("w1", "b1", "w2", "b2"),
    "scfnn": ("w1", "b1", "w2", "b2"),
    "crbf": ("gamma", "sigma", "w", "b"),
    "fcrbf": ("gamma", "upsilon", "w"),
    "ptrbf": ("gamma", "sigma", "w", "b"),
}

# Learning-rate group per tensor name.
_RATE_OF = {
    "w1": "eta_w", "w2": "eta_w", "w": "eta_w",
    "b1": "eta_b", "b2": "eta_b", "b": "eta_b",
    "gamma": "eta_gamma", "sigma": "eta_sigma", "upsilon": "eta_upsilon",
}


class NumericDomainError(ArithmeticError):
    """A forward/backward pass produced a non-finite intermediate."""


@dataclass(frozen=True)
class NetworkConfig:
    """Architecture tag plus layer widths (n_hidden is the kernel count for RBFs)."""

    architecture: str
    n_in: int
    n_hidden: int
    n_out: int

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(
                f"unknown architecture {self.architecture!r}, expected one of {ARCHITECTURES}"
            )
        for name in ("n_in", "n_hidden", "n_out"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")


@dataclass(frozen=True)
class Hyperparameters:
    """Per-group learning rates, momentum, init scale, and kernel floor.

    Rates that do not apply to an architecture (e.g. eta_b for fcrbf)
    must stay at zero; `validate_for` enforces the applicability table.
    smoothing_window is the reporting window (frames) used when smoothing
    MSE/BER series, not a training quantity.
    """

    eta_w: float = 0.0
    eta_b: float = 0.0
    eta_gamma: float = 0.0
    eta_sigma: float = 0.0
    eta_upsilon: float = 0.0
    alpha: float = 0.0
    mu0: float = 0.01
    epsilon: float = 0.01
    smoothing_window: int = 20

    def validate_for(self, architecture: str) -> None:
        applicable = {
            "cvfnn": {"eta_w", "eta_b"},
            "scfnn": {"eta_w", "eta_b"},
            "crbf": {"eta_w", "eta_b", "eta_gamma", "eta_sigma"},
            "fcrbf": {"eta_w", "eta_gamma", "eta_upsilon"},
            "ptrbf": {"eta_w", "eta_b", "eta_gamma", "eta_sigma"},
        }[architecture]
        for name in ("eta_w", "eta_b", "eta_gamma", "eta_sigma", "eta_upsilon"):
            value = getattr(self, name)
            if value < 0:
                raise ValueError(f"{name} must be >= 0, got {value}")
            if value != 0.0 and name not in applicable:
                raise ValueError(f"{name} does not apply to {architecture}")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must be in [0, 1), got {self.alpha}")
        if self.mu0 < 0:
            raise ValueError(f"mu0 must be >= 0, got {self.mu0}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.smoothing_window < 1:
            raise ValueError(f"smoothing_window must be >= 1, got {self.smoothing_window}")


def default_hidden_width(architecture: str) -> int:
    """Hidden width that proved sufficient for the decoding task: 68 for the
    feedforward nets, 100 kernels for the RBF nets."""
    return 68 if architecture in ("cvfnn", "scfnn") else 100


def default_hyperparameters(architecture: str) -> Hyperparameters:
    """Per-architecture training rates tuned for the decoding task."""
    table = {
        "cvfnn": dict(eta_w=0.0125, eta_b=0.0125, alpha=0.00125),
        "scfnn": dict(eta_w=0.0125, eta_b=0.0125, alpha=0.00125),
        "crbf": dict(eta_w=0.0100, eta_b=0.0200, eta_gamma=0.0200, eta_sigma=0.0100, alpha=0.00100),
        "fcrbf": dict(eta_w=0.0125, eta_gamma=0.0125, eta_upsilon=0.0125, alpha=0.00125),
        "ptrbf": dict(eta_w=0.0020, eta_b=0.0200, eta_gamma=0.0200, eta_sigma=0.0100, alpha=0.00020),
    }
    if architecture not in table:
        raise ValueError(f"unknown architecture {architecture!r}")
    return Hyperparameters(**table[architecture])


@dataclass
class NetworkState:
    """All trainable tensors plus their momentum buffers for one network."""

    config: NetworkConfig
    params: dict
    momentum: dict
    init_record: dict = field(default_factory=dict)


def _draw_complex(rng: Rng, shape: tuple, mu0: float) -> np.ndarray:
    # component std mu0 <=> total complex variance 2*mu0^2
    if mu0 == 0.0:
        return np.zeros(shape, dtype=np.complex128)
    n = int(np.prod(shape))
    return sample_cgauss(rng, n, 2.0 * mu0 * mu0).reshape(shape)


def init_network(config: NetworkConfig, hp: Hyperparameters, rng: Rng) -> NetworkState:
    """Draw a fresh state; momentum buffers start at zero.

    Weights and biases are i.i.d. CN(0, 2*mu0^2), i.e. standard
    deviation mu0 per real component.  Kernel geometry is data- and
    dimension-scaled so the kernels start responsive for unit-power
    inputs of any width (tiny centers would leave every Gaussian kernel
    both saturated and indistinguishable):

    * RBF centers gamma ~ CN(0, 1) per entry, matching the unit power of
      the received-signal inputs, so E||x - gamma_i||^2 = 2*n_in.
    * crbf sigma = sqrt(2*n_in) (enters the kernel squared).
    * ptrbf sigma = n_in * (1 + 1j) (the real/imaginary distances each
      average n_in; sigma enters linearly).
    * fcrbf upsilon ~ CN(0, 1/n_in) per entry (fan-in scaling puts the
      sech argument at unit variance).
    """
    hp.validate_for(config.architecture)
    arch = config.architecture
    n0, n1, n2 = config.n_in, config.n_hidden, config.n_out
    params: dict = {}
    if arch in ("cvfnn", "scfnn"):
        params["w1"] = _draw_complex(rng, (n1, n0), hp.mu0)
        params["b1"] = _draw_complex(rng, (n1,), hp.mu0)
        params["w2"] = _draw_complex(rng, (n2, n1), hp.mu0)
        params["b2"] = _draw_complex(rng, (n2,), hp.mu0)
    elif arch == "crbf":
        params["gamma"] = sample_cgauss(rng, n1 * n0, 1.0).reshape(n1, n0)
        params["sigma"] = np.full(n1, np.sqrt(2.0 * n0))
        params["w"] = _draw_complex(rng, (n2, n1), hp.mu0)
        params["b"] = _draw_complex(rng, (n2,), hp.mu0)
    elif arch == "fcrbf":
        params["gamma"] = sample_cgauss(rng, n1 * n0, 1.0).reshape(n1, n0)
        params["upsilon"] = sample_cgauss(rng, n1 * n0, 1.0 / n0).reshape(n1, n0)
        params["w"] = _draw_complex(rng, (n2, n1), hp.mu0)
    else:  # ptrbf
        params["gamma"] = sample_cgauss(rng, n1 * n0, 1.0).reshape(n1, n0)
        params["sigma"] = np.full(n1, float(n0) * (1.0 + 1.0j), dtype=np.complex128)
        params["w"] = _draw_complex(rng, (n2, n1), hp.mu0)
        params["b"] = _draw_complex(rng, (n2,), hp.mu0)
    momentum = {k: np.zeros_like(v) for k, v in params.items()}
    record = {"seed": rng.seed, "stream_label": rng.stream_label, "mu0": hp.mu0}
    return NetworkState(config=config, params=params, momentum=momentum, init_record=record)


def _check_finite(values: np.ndarray, what: str) -> None:
    finite = np.isfinite(values)
    if not finite.all():
        idx = int(np.flatnonzero(~finite.reshape(-1))[0])
        raise NumericDomainError(f"non-finite {what} at index {idx}")


_ATANH_GUARD = 1e-9


def _forward_full(state: NetworkState, x: np.ndarray):
    """Forward pass returning (y, cache of intermediates for the backward pass)."""
    p = state.params
    arch = state.config.architecture
    if x.shape != (state.config.n_in,):
        raise ValueError(f"expected input shape ({state.config.n_in},), got {x.shape}")

    if arch == "cvfnn":
        z = p["w1"] @ x + p["b1"]
        # nudge inputs sitting on the atanh branch points off the singularity
        near = (np.abs(z - 1.0) < _ATANH_GUARD) | (np.abs(z + 1.0) < _ATANH_GUARD)
        if near.any():
            z = z + near * _ATANH_GUARD
        a = np.arctanh(z)
        _check_finite(a, "cvfnn hidden activation (neuron)")
        y = p["w2"] @ a + p["b2"]
        cache = {"z": z, "a": a}
    elif arch == "scfnn":
        z = p["w1"] @ x + p["b1"]
        tu = np.tanh(z.real)
        tv = np.tanh(z.imag)
        a = tu + 1j * tv
        y = p["w2"] @ a + p["b2"]
        cache = {"a": a, "tu": tu, "tv": tv}
    elif arch == "crbf":
        diff = x[None, :] - p["gamma"]
        dist2 = np.abs(diff) ** 2
        d = dist2.sum(axis=1)
        sig2 = p["sigma"] ** 2
        phi = np.exp(-d / sig2)
        _check_finite(phi, "crbf kernel output (neuron)")
        y = p["w"] @ phi + p["b"]
        cache = {"diff": diff, "d": d, "phi": phi, "sig2": sig2}
    elif arch == "fcrbf":
        diff = x[None, :] - p["gamma"]
        t = (p["upsilon"] * diff).sum(axis=1)
        with np.errstate(over="ignore", invalid="ignore"):
            phi = 1.0 / np.cosh(t)  # overflowing cosh saturates sech to 0
        _check_finite(phi, "fcrbf kernel output (neuron)")
        y = p["w"] @ phi
        cache = {"diff": diff, "t": t, "phi": phi}
    else:  # ptrbf
        dr = x.real[None, :] - p["gamma"].real
        di = x.imag[None, :] - p["gamma"].imag
        d_re = (dr ** 2).sum(axis=1)
        d_im = (di ** 2).sum(axis=1)
        s_re = p["sigma"].real
        s_im = p["sigma"].imag
        pr = np.exp(-d_re / s_re)
        pi = np.exp(-d_im / s_im)
        phi = pr + 1j * pi
        _check_finite(phi, "ptrbf kernel output (neuron)")
        y = p["w"] @ phi + p["b"]
        cache = {"dr": dr, "di": di, "d_re": d_re, "d_im": d_im,
                 "pr": pr, "pi": pi, "phi": phi}
    _check_finite(y, "output (neuron)")
    return y, cache


def forward(state: NetworkState, x: np.ndarray) -> np.ndarray:
    """Network output for one input vector."""
    y, _ = _forward_full(state, np.asarray(x, dtype=np.complex128))
    return y


def gradients(state: NetworkState, x: np.ndarray, d: np.ndarray):
    """Analytic gradients of the instantaneous cost E = sum |d - y|^2.

    Returns (grads, y, err_energy).  Complex tensors carry dE/d(conj
    theta); the real crbf sigma carries dE/d sigma.
    """
    x = np.asarray(x, dtype=np.complex128)
    d = np.asarray(d, dtype=np.complex128)
    y, cache = _forward_full(state, x)
    e = d - y
    err_energy = float(np.sum(np.abs(e) ** 2))
    p = state.params
    arch = state.config.architecture
    g: dict = {}

    if arch in ("cvfnn", "scfnn"):
        a = cache["a"]
        g["w2"] = -np.outer(e, a.conj())
        g["b2"] = -e
        delta = p["w2"].conj().T @ e
        if arch == "cvfnn":
            act_prime = 1.0 / (1.0 - cache["z"] ** 2)
            s = delta * act_prime.conj()
        else:
            s = delta.real * (1.0 - cache["tu"] ** 2) + 1j * (delta.imag * (1.0 - cache["tv"] ** 2))
        g["w1"] = -np.outer(s, x.conj())
        g["b1"] = -s
    elif arch == "crbf":
        phi = cache["phi"]
        g["w"] = -np.outer(e, phi)
        g["b"] = -e
        delta = p["w"].conj().T @ e
        r = 2.0 * delta.real * phi / cache["sig2"]
        g["gamma"] = -r[:, None] * cache["diff"]
        g["sigma"] = -2.0 * r * cache["d"] / p["sigma"]
    elif arch == "fcrbf":
        phi = cache["phi"]
        g["w"] = -np.outer(e, phi.conj())
        delta = p["w"].conj().T @ e
        sech_prime = -phi * np.tanh(cache["t"])
        rho = delta * sech_prime.conj()
        g["upsilon"] = -rho[:, None] * cache["diff"].conj()
        g["gamma"] = rho[:, None] * p["upsilon"].conj()
    else:  # ptrbf
        phi = cache["phi"]
        g["w"] = -np.outer(e, phi.conj())
        g["b"] = -e
        delta = p["w"].conj().T @ e
        s_re = p["sigma"].real
        s_im = p["sigma"].imag
        cr = delta.real * cache["pr"] / s_re
        ci = delta.imag * cache["pi"] / s_im
        g["gamma"] = -2.0 * (cr[:, None] * cache["dr"] + 1j * (ci[:, None] * cache["di"]))
        g["sigma"] = -(cr * cache["d_re"] / s_re + 1j * (ci * cache["d_im"] / s_im))
    return g, y, err_energy


def train_step(state: NetworkState, x: np.ndarray, d: np.ndarray, hp: Hyperparameters):
    """One online steepest-descent step; returns (state, err_energy).

    err_energy is the instantaneous cost E = sum |d - y|^2 evaluated
    before the update.  A non-finite forward or gradient rejects the
    step and leaves the state (and momentum) unchanged.
    """
    g, _, err_energy = gradients(state, x, d)
    for name, grad in g.items():
        _check_finite(grad, f"gradient of {name} (entry)")
    arch = state.config.architecture
    for name, grad in g.items():
        eta = getattr(hp, _RATE_OF[name])
        mom = state.momentum[name]
        mom *= hp.alpha
        mom -= eta * grad
        state.params[name] += mom
    if arch == "crbf":
        np.maximum(state.params["sigma"], hp.epsilon, out=state.params["sigma"])
    elif arch == "ptrbf":
        sig = state.params["sigma"]
        state.params["sigma"] = np.maximum(sig.real, hp.epsilon) + 1j * np.maximum(sig.imag, hp.epsilon)
    return state, err_energy


def _cost(state: NetworkState, x: np.ndarray, d: np.ndarray) -> float:
    y, _ = _forward_full(state, x)
    return float(np.sum(np.abs(d - y) ** 2))


def numeric_gradient(state: NetworkState, x: np.ndarray, d: np.ndarray,
                     name: str, index: int, h: float = 1e-6):
    """Central-difference (dE/dRe, dE/dIm) for one parameter coordinate.

    Test oracle only.  For real tensors the imaginary slot is 0.  The
    parameter is restored bit-exactly afterwards.
    """
    if h <= 0:
        raise ValueError(f"step h must be positive, got {h}")
    if name not in state.params:
        raise ValueError(f"unknown parameter {name!r} for {state.config.architecture}")
    arr = state.params[name]
    if not 0 <= index < arr.size:
        raise ValueError(f"coordinate {index} out of range for {name} with size {arr.size}")
    x = np.asarray(x, dtype=np.complex128)
    d = np.asarray(d, dtype=np.complex128)
    original = arr.flat[index]

    def diff(step):
        arr.flat[index] = original + step
        plus = _cost(state, x, d)
        arr.flat[index] = original - step
        minus = _cost(state, x, d)
        arr.flat[index] = original
        return (plus - minus) / (2.0 * h)

    d_re = diff(h)
    d_im = diff(1j * h) if np.iscomplexobj(arr) else 0.0
    return d_re, d_im


GRADCHECK_FLOOR = 1e-3


def gradient_check(architecture: str, n_in: int = 8, n_hidden: int = 5, n_out: int = 2,
                   draws: int = 20, h: float = 1e-6, seed: int = 0):
    """Compare every analytic partial derivative against central differences.

    Relative error uses |a - n| / max(|a|, |n|, GRADCHECK_FLOOR).  The
    denominator floor reflects what central differences can resolve: at
    h = 1e-6 with costs of order one the difference quotient carries
    ~1e-9 of float64 roundoff, so derivatives below ~1e-3 are compared
    at ~1e-8 absolute accuracy instead of a meaningless relative one.
    Returns a dict with the worst error and its location.
    """
    config = NetworkConfig(architecture, n_in, n_hidden, n_out)
    hp = default_hyperparameters(architecture)
    worst = {"architecture": architecture, "max_rel_err": 0.0, "param": None, "index": None}
    for draw in range(draws):
        rng = Rng(seed + draw, f"gradcheck-{architecture}")
        state = init_network(config, Hyperparameters(mu0=0.1, epsilon=hp.epsilon), rng)
        x = sample_cgauss(rng, n_in, 1.0)
        d = sample_cgauss(rng, n_out, 1.0)
        grads, _, _ = gradients(state, x, d)
        for name, g in grads.items():
            flat = g.reshape(-1)
            for index in range(flat.size):
                num_re, num_im = numeric_gradient(state, x, d, name, index, h)
                if np.iscomplexobj(state.params[name]):
                    ana_re, ana_im = 2.0 * flat[index].real, 2.0 * flat[index].imag
                else:
                    ana_re, ana_im = float(flat[index].real), 0.0
                for ana, num in ((ana_re, num_re), (ana_im, num_im)):
                    rel = abs(ana - num) / max(abs(ana), abs(num), GRADCHECK_FLOOR)
                    if rel > worst["max_rel_err"]:
                        worst.update(max_rel_err=rel, param=name, index=index)
    return worst


class ComplexityCount(NamedTuple):
    train_real_mults: int
    infer_real_mults: int


def complexity(config: NetworkConfig) -> ComplexityCount:
    """Closed-form real-multiplication counts for one inference and one
    online training iteration.

    Counting conventions (applied uniformly):

    * complex*complex = 4 real multiplications, complex*real = 2,
      real*real = 1; real divisions count as multiplications;
      transcendental evaluations (exp, tanh, atanh, sech) are free.
    * Scalar factors (learning rates, constant 2s) are folded into
      per-neuron coefficients before any outer product.
    * The momentum update delta = alpha*delta - eta*grad is part of the
      training iteration: alpha*delta costs 2 per complex entry (1 per
      real entry); eta is already folded into the gradient.

    With n0 = n_in, n1 = n_hidden, n2 = n_out the per-architecture counts
    are (itemized in the source):

    * cvfnn:  infer 4*n0*n1 + 4*n1*n2
              train 10*n0*n1 + 14*n1*n2 + 18*n1 + 6*n2
    * scfnn:  infer 4*n0*n1 + 4*n1*n2
              train 10*n0*n1 + 14*n1*n2 + 10*n1 + 6*n2
    * crbf:   infer 2*n0*n1 + 2*n1*n2 + 2*n1
              train  6*n0*n1 + 10*n1*n2 + 10*n1 + 6*n2
    * fcrbf:  infer 4*n0*n1 + 4*n1*n2
              train 16*n0*n1 + 14*n1*n2 + 12*n1 + 2*n2
    * ptrbf:  infer 2*n0*n1 + 4*n1*n2 + 2*n1
              train  6*n0*n1 + 14*n1*n2 + 14*n1 + 6*n2
    """
    n0, n1, n2 = config.n_in, config.n_hidden, config.n_out
    arch = config.architecture
    if arch == "cvfnn":
        # infer: hidden product 4*n0*n1, output product 4*n1*n2 (bias adds
        # and atanh are multiplication-free).
        infer = 4 * n0 * n1 + 4 * n1 * n2
        # train: infer
        #  + output layer: scale eta*e 2*n2, outer 4*n1*n2, momentum 2*n1*n2
        #  + output bias: scale 2*n2, momentum 2*n2
        #  + backprop delta = W2^H e: 4*n1*n2
        #  + atanh'(z) = 1/(1-z^2): square 4*n1, |.|^2 2*n1, conj/|.|^2 2*n1
        #  + s = delta (x) conj(act'): 4*n1, fold eta_w: 2*n1
        #  + hidden weights: outer 4*n0*n1, momentum 2*n0*n1
        #  + hidden bias: scale 2*n1, momentum 2*n1
        train = infer + (2 * n2 + 4 * n1 * n2 + 2 * n1 * n2) + 4 * n2 + 4 * n1 * n2 \
            + 8 * n1 + 6 * n1 + (4 * n0 * n1 + 2 * n0 * n1) + 4 * n1
    elif arch == "scfnn":
        infer = 4 * n0 * n1 + 4 * n1 * n2
        # same skeleton as cvfnn; activation derivative is two real
        # tanh^2 products (2*n1) and s costs 2*n1 + eta fold 2*n1.
        train = infer + (2 * n2 + 4 * n1 * n2 + 2 * n1 * n2) + 4 * n2 + 4 * n1 * n2 \
            + 2 * n1 + 4 * n1 + (4 * n0 * n1 + 2 * n0 * n1) + 4 * n1
    elif arch == "crbf":
        # infer: |x - gamma|^2 distances 2*n0*n1, sigma^2 n1, D/sigma^2 n1,
        # readout (complex weights * real kernels) 2*n1*n2.
        infer = 2 * n0 * n1 + 2 * n1 * n2 + 2 * n1
        # train: infer
        #  + readout: scale 2*n2, outer 2*n1*n2, momentum 2*n1*n2
        #  + bias: 4*n2; delta: 4*n1*n2
        #  + r = 2*Re(delta)*phi/sigma^2 with eta folded: 3*n1
        #  + centers: outer (real r x complex diff) 2*n0*n1, momentum 2*n0*n1
        #  + sigma: grad 3*n1, scale+momentum 2*n1
        train = infer + (2 * n2 + 2 * n1 * n2 + 2 * n1 * n2) + 4 * n2 + 4 * n1 * n2 \
            + 3 * n1 + (2 * n0 * n1 + 2 * n0 * n1) + 5 * n1
    elif arch == "fcrbf":
        # infer: t rows 4*n0*n1, complex readout 4*n1*n2.
        infer = 4 * n0 * n1 + 4 * n1 * n2
        # train: infer
        #  + readout: scale 2*n2, outer 4*n1*n2, momentum 2*n1*n2; delta 4*n1*n2
        #  + sech' = -sech*tanh: 4*n1; rho = delta (x) conj(sech'): 4*n1
        #  + eta folds for the two kernel tensors: 2*n1 + 2*n1
        #  + upsilon: outer 4*n0*n1, momentum 2*n0*n1
        #  + centers: outer 4*n0*n1, momentum 2*n0*n1
        train = infer + (2 * n2 + 4 * n1 * n2 + 2 * n1 * n2) + 4 * n1 * n2 \
            + 4 * n1 + 4 * n1 + 4 * n1 + (4 * n0 * n1 + 2 * n0 * n1) + (4 * n0 * n1 + 2 * n0 * n1)
    else:  # ptrbf
        # infer: split squared distances 2*n0*n1, the two exponent
        # divisions 2*n1, complex readout 4*n1*n2.
        infer = 2 * n0 * n1 + 4 * n1 * n2 + 2 * n1
        # train: infer
        #  + readout: scale 2*n2, outer 4*n1*n2, momentum 2*n1*n2
        #  + bias: 4*n2; delta: 4*n1*n2
        #  + cr, ci per-neuron factors (eta folded): 6*n1
        #  + centers: outer (two real parts) 2*n0*n1, momentum 2*n0*n1
        #  + sigma: grad 4*n1, momentum 2*n1
        train = infer + (2 * n2 + 4 * n1 * n2 + 2 * n1 * n2) + 4 * n2 + 4 * n1 * n2 \
            + 6 * n1 + (2 * n0 * n1 + 2 * n0 * n1) + 6 * n1
    return ComplexityCount(train_real_mults=int(train), infer_real_mults=int(infer))


_STATE_FORMAT = "cvnnlink-state-v1"


def save_state(state: NetworkState, path) -> None:
    """Checkpoint all tensors plus metadata; load_state restores bit-exactly."""
    meta = {
        "format": _STATE_FORMAT,
        "config": asdict(state.config),
        "init_record": state.init_record,
    }
    arrays = {f"param__{k}": v for k, v in state.params.items()}
    arrays.update({f"mom__{k}": v for k, v in state.momentum.items()})
    np.savez(path, meta=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8), **arrays)


def load_state(path) -> NetworkState:
    """Restore a checkpoint written by save_state."""
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode("utf-8"))
        if meta.get("format") != _STATE_FORMAT:
            raise ValueError(f"unsupported state format {meta.get('format')!r}")
        params = {k[len("param__"):]: data[k] for k in data.files if k.startswith("param__")}
        momentum = {k[len("mom__"):]: data[k] for k in data.files if k.startswith("mom__")}
    config = NetworkConfig(**meta["config"])
    return NetworkState(config=config, params=params, momentum=momentum,
                        init_record=meta.get("init_record", {}))
