"""Metropolis-Hastings-within-Gibbs sampler.

Each iteration sweeps, in order: (1) every latent position via a normal
random-walk proposal, (2) the initial-position precision tau_0 (conjugate
gamma), (3) the hyperprecision tau_1 (conjugate inverse gamma), (4) the
transition precisions tau_2..tau_T sequentially, each conditional on the
freshest previous value, (5) the random-walk shape theta via a log-normal
random walk, and (6) the reaches via a Dirichlet proposal centered at the
current value.

The latent proposal scale adapts toward ~0.25 acceptance during burn-in
and is frozen afterwards.  Stored draws are rigidly aligned to the first
post-burn-in draw; burn-in draws are never aligned (the posterior is
invariant under rigid motions, so only stored draws need a common frame).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .backend import BACKEND, kernels
from .core import (
    ConfigurationError,
    Hyperparams,
    ModelParams,
    RankPanel,
    validate_trajectories,
)
from .draws import PosteriorDraws
from .initialization import InitResult
from .procrustes import procrustes_align

logger = logging.getLogger(__name__)

ADAPT_WINDOW = 100
ADAPT_TARGET = 0.25
CHECKPOINT_FORMAT = "rankspace-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass
class SamplerContext:
    """Fixed per-run quantities: data tensors and resolved hyperparameters."""

    panel: RankPanel
    orders: np.ndarray          # (T, n, n-1) int64
    q: int
    p: int
    alpha: np.ndarray
    lambda0: float
    lambda1: float
    mu: float
    sigma2: float
    kappa: float

    @property
    def n(self) -> int:
        return self.panel.n

    @property
    def T(self) -> int:
        return self.panel.T

    @property
    def alpha_is_flat(self) -> bool:
        return bool(np.all(self.alpha == 1.0))


@dataclass
class ChainState:
    """Everything that evolves along the chain, including likelihood caches."""

    X: np.ndarray               # (T, n, p)
    params: ModelParams
    rng: np.random.Generator
    step_latent: float
    step_theta: float
    iteration: int = 0
    dist: np.ndarray | None = None     # (T, n, n) pairwise distances per slice
    row_ll: np.ndarray | None = None   # (T, n) row log-likelihoods
    accept_latent: int = 0
    propose_latent: int = 0
    accept_theta: int = 0
    propose_theta: int = 0
    accept_reach: int = 0
    propose_reach: int = 0
    align_target: np.ndarray | None = None   # stacked (T*n, p)

    def acceptance_rates(self) -> dict[str, float]:
        def rate(a: int, p: int) -> float:
            return a / p if p else float("nan")

        return {
            "latent": rate(self.accept_latent, self.propose_latent),
            "theta": rate(self.accept_theta, self.propose_theta),
            "reach": rate(self.accept_reach, self.propose_reach),
        }


@dataclass
class ChainResult:
    """Stored draws plus diagnostics from one chain."""

    draws: PosteriorDraws
    traces: dict[str, np.ndarray]
    acceptance: dict[str, float]
    step_latent: float
    align_target: np.ndarray
    settings: dict


def build_context(panel: RankPanel, hyper: Hyperparams, p: int,
                  init: InitResult | None = None) -> SamplerContext:
    """Resolve hyperparameters (init-derived unless overridden) and cache orderings."""
    hyper.validate(panel.n)
    if panel.T < 2:
        raise ConfigurationError("the sampler needs at least two time points")

    def resolve(name: str) -> float:
        value = getattr(hyper, name)
        if value is None:
            if init is None:
                raise ConfigurationError(
                    f"hyperparameter {name!r} is unset and no initialization was given"
                )
            value = getattr(init, name)
        return float(value)

    q = panel.n - 1 if hyper.top_q is None else hyper.top_q
    if not 1 <= q <= panel.n - 1:
        raise ConfigurationError(f"top_q must lie in 1..{panel.n - 1}, got {q}")
    return SamplerContext(
        panel=panel,
        orders=np.ascontiguousarray(panel.orderings()),
        q=q,
        p=p,
        alpha=hyper.resolved_alpha(panel.n),
        lambda0=resolve("lambda0"),
        lambda1=resolve("lambda1"),
        mu=resolve("mu"),
        sigma2=float(hyper.sigma2),
        kappa=float(hyper.kappa),
    )


def build_caches(state: ChainState, ctx: SamplerContext) -> None:
    """(Re)compute the distance and row log-likelihood caches from scratch."""
    T, n = ctx.T, ctx.n
    state.dist = np.empty((T, n, n))
    for t in range(T):
        diff = state.X[t][:, None, :] - state.X[t][None, :, :]
        state.dist[t] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    state.row_ll = np.empty((T, n))
    kernels.panel_loglik(state.X, np.log(state.params.r), ctx.orders, ctx.q,
                         state.row_ll)


def init_state(ctx: SamplerContext, init: InitResult, hyper: Hyperparams) -> ChainState:
    """Chain state from an initialization result."""
    X = validate_trajectories(np.array(init.X1), ctx.n, ctx.T, ctx.p)
    params = ModelParams(
        r=init.r1.copy(),
        tau0=init.tau0_1,
        tau1=init.tau1_1,
        tau=init.tau_1.copy(),
        theta=init.theta1,
    )
    state = ChainState(
        X=X,
        params=params,
        rng=np.random.default_rng(hyper.seed),
        step_latent=hyper.step_latent,
        step_theta=hyper.step_theta,
    )
    build_caches(state, ctx)
    return state


def _tau_links(params: ModelParams) -> np.ndarray:
    """Precisions of the Gaussian links into each slice: [tau0, tau2, .., tauT]."""
    return np.concatenate(([params.tau0], params.tau))


def mh_update_latent(state: ChainState, ctx: SamplerContext,
                     use_likelihood: bool = True) -> int:
    """Step 1: Metropolis sweep over all (t, i) latent positions."""
    T, n, p = ctx.T, ctx.n, ctx.p
    normals = state.rng.standard_normal((T, n, p))
    unifs = state.rng.random((T, n))
    accepts, nonfinite = kernels.latent_sweep(
        state.X, state.dist, state.row_ll, np.log(state.params.r), ctx.orders,
        _tau_links(state.params), ctx.q, state.step_latent, normals, unifs,
        use_likelihood,
    )
    if nonfinite:
        logger.warning("latent sweep at iteration %d: %d non-finite MH ratios rejected",
                       state.iteration, nonfinite)
    state.accept_latent += int(accepts)
    state.propose_latent += T * n
    return int(accepts)


def draw_tau0(state: ChainState, ctx: SamplerContext) -> None:
    """Step 2: conjugate gamma draw for the initial-position precision."""
    shape = 1.0 + ctx.n * ctx.p / 2.0
    rate = ctx.lambda0 + 0.5 * float(np.sum(state.X[0] ** 2))
    state.params.tau0 = float(state.rng.gamma(shape, 1.0 / rate))


def draw_tau1(state: ChainState, ctx: SamplerContext) -> None:
    """Step 3: conjugate inverse-gamma draw for the precision-path scale."""
    shape = ctx.lambda1 / 2.0 + state.params.theta
    ig_scale = 0.5 + state.params.theta * state.params.tau[0]
    state.params.tau1 = float(ig_scale / state.rng.gamma(shape, 1.0))


def draw_tau_path(state: ChainState, ctx: SamplerContext) -> None:
    """Step 4: transition precisions tau_2..tau_T, sequentially in t.

    Each tau_t is drawn from the gamma density stated for its conditional,
    using the freshest tau_{t-1} (tau_1 for t=2).  The stated conditional
    does not carry tau_t's appearance in tau_{t+1}'s prior rate; it is
    sampled exactly as stated.
    """
    theta = state.params.theta
    shape = theta + ctx.n * ctx.p / 2.0
    prev = state.params.tau1
    for idx in range(ctx.T - 1):
        ss = float(np.sum((state.X[idx + 1] - state.X[idx]) ** 2))
        rate = theta / prev + 0.5 * ss
        if not rate > 0.0:
            raise ConfigurationError(f"non-positive gamma rate for tau_{idx + 2}")
        value = float(state.rng.gamma(shape, 1.0 / rate))
        state.params.tau[idx] = value
        prev = value


def _log_gamma_pdf(x: float, shape: float, rate: float) -> float:
    return shape * np.log(rate) - gammaln(shape) + (shape - 1.0) * np.log(x) - rate * x


def _theta_logcond(theta: float, tau1: float, tau: np.ndarray, mu: float,
                   sigma2: float, include_path_term: bool = True) -> float:
    if theta <= 0:
        return -np.inf
    total = (-np.log(theta) - 0.5 * np.log(2.0 * np.pi * sigma2)
             - (np.log(theta) - mu) ** 2 / (2.0 * sigma2))
    if include_path_term and tau.size:
        prev = np.concatenate(([tau1], tau[:-1]))
        total += float(np.sum(
            theta * np.log(theta / prev) - gammaln(theta)
            + (theta - 1.0) * np.log(tau) - theta * tau / prev
        ))
    return float(total)


def mh_update_theta(state: ChainState, ctx: SamplerContext,
                    include_path_term: bool = True,
                    record: list | None = None) -> bool:
    """Step 5: log-normal random-walk update of the random-walk shape."""
    params = state.params
    theta = params.theta
    proposal = theta * float(np.exp(state.step_theta * state.rng.standard_normal()))
    log_ratio = (
        _theta_logcond(proposal, params.tau1, params.tau, ctx.mu, ctx.sigma2,
                       include_path_term)
        - _theta_logcond(theta, params.tau1, params.tau, ctx.mu, ctx.sigma2,
                         include_path_term)
        + np.log(proposal) - np.log(theta)
    )
    u = state.rng.random()
    accepted = bool(np.isfinite(log_ratio) and np.log(u) < log_ratio)
    if record is not None:
        record.append((theta, proposal, float(log_ratio), accepted))
    if accepted:
        params.theta = proposal
        state.accept_theta += 1
    state.propose_theta += 1
    return accepted


def _dirichlet_logpdf(x: np.ndarray, conc: np.ndarray) -> float:
    return float(gammaln(conc.sum()) - gammaln(conc).sum()
                 + np.sum((conc - 1.0) * np.log(x)))


def mh_update_reach(state: ChainState, ctx: SamplerContext,
                    record: list | None = None) -> bool:
    """Step 6: Dirichlet-proposal update of the reaches.

    Proposal r' ~ Dirichlet(kappa * r); the MH ratio carries the likelihood
    change, the Dirichlet(alpha) prior ratio (zero for the flat prior) and
    the proposal asymmetry correction.
    """
    params = state.params
    r = params.r
    state.propose_reach += 1
    proposal = state.rng.dirichlet(ctx.kappa * r)
    if not np.all(np.isfinite(proposal)) or np.any(proposal <= 0.0):
        logger.warning("reach proposal outside the open simplex at iteration %d; rejected",
                       state.iteration)
        if record is not None:
            record.append((r.copy(), proposal, -np.inf, False))
        return False
    new_rows = np.empty_like(state.row_ll)
    log_rp = np.log(proposal)
    ll_new = 0.0
    for t in range(ctx.T):
        ll_new += kernels.slice_loglik(state.dist[t], log_rp, ctx.orders[t],
                                       ctx.q, new_rows[t])
    log_ratio = ll_new - float(state.row_ll.sum())
    if not ctx.alpha_is_flat:
        log_ratio += float(np.sum((ctx.alpha - 1.0) * (log_rp - np.log(r))))
    log_ratio += (_dirichlet_logpdf(r, ctx.kappa * proposal)
                  - _dirichlet_logpdf(proposal, ctx.kappa * r))
    u = state.rng.random()
    accepted = bool(np.isfinite(log_ratio) and np.log(u) < log_ratio)
    if record is not None:
        record.append((r.copy(), proposal.copy(), float(log_ratio), accepted))
    if accepted:
        params.r = proposal
        state.row_ll[:] = new_rows
        state.accept_reach += 1
    return accepted


def gibbs_sweep(state: ChainState, ctx: SamplerContext,
                use_likelihood: bool = True) -> None:
    """One full iteration: steps 1-6 in the stated order."""
    mh_update_latent(state, ctx, use_likelihood)
    draw_tau0(state, ctx)
    draw_tau1(state, ctx)
    draw_tau_path(state, ctx)
    mh_update_theta(state, ctx)
    mh_update_reach(state, ctx)
    state.params.validate()
    state.iteration += 1


def run_chain(panel: RankPanel, hyper: Hyperparams, init: InitResult,
              use_likelihood: bool = True,
              progress: bool = False) -> ChainResult:
    """Run one chain and return aligned stored draws plus diagnostics."""
    p = np.asarray(init.X1).shape[2]
    ctx = build_context(panel, hyper, p, init)
    state = init_state(ctx, init, hyper)
    iterations, burn_in, thin = hyper.iterations, hyper.burn_in, hyper.thin
    T, n = ctx.T, ctx.n

    n_store = (iterations - burn_in + thin - 1) // thin
    draws = PosteriorDraws(
        X=np.empty((n_store, T, n, p)),
        r=np.empty((n_store, n)),
        tau0=np.empty(n_store),
        tau1=np.empty(n_store),
        tau=np.empty((n_store, T - 1)),
        theta=np.empty(n_store),
        iters=np.empty(n_store, dtype=np.int64),
    )
    traces = {
        "theta": np.empty(iterations),
        "tau0": np.empty(iterations),
        "tau1": np.empty(iterations),
        "tau": np.empty((iterations, T - 1)),
    }

    window_accepts = 0
    window_index = 0
    stored = 0
    for it in range(iterations):
        before = state.accept_latent
        gibbs_sweep(state, ctx, use_likelihood)
        window_accepts += state.accept_latent - before

        traces["theta"][it] = state.params.theta
        traces["tau0"][it] = state.params.tau0
        traces["tau1"][it] = state.params.tau1
        traces["tau"][it] = state.params.tau

        in_burn_in = it < burn_in
        if in_burn_in and (it + 1) % ADAPT_WINDOW == 0:
            window_index += 1
            rate = window_accepts / (ADAPT_WINDOW * T * n)
            gain = 1.0 / np.sqrt(window_index)
            state.step_latent = float(np.clip(
                state.step_latent * np.exp(gain * (rate - ADAPT_TARGET)),
                1e-5, 1e2))
            window_accepts = 0
        if not in_burn_in:
            if state.align_target is None:
                state.align_target = state.X.reshape(T * n, p).copy()
            if (it - burn_in) % thin == 0:
                aligned = procrustes_align(state.X.reshape(T * n, p),
                                           state.align_target)
                draws.X[stored] = aligned.reshape(T, n, p)
                draws.r[stored] = state.params.r
                draws.tau0[stored] = state.params.tau0
                draws.tau1[stored] = state.params.tau1
                draws.tau[stored] = state.params.tau
                draws.theta[stored] = state.params.theta
                draws.iters[stored] = it
                stored += 1
        if progress and (it + 1) % max(1, iterations // 20) == 0:
            logger.info("iteration %d/%d (latent acceptance %.3f)",
                        it + 1, iterations, state.acceptance_rates()["latent"])

    assert stored == n_store
    return ChainResult(
        draws=draws,
        traces=traces,
        acceptance=state.acceptance_rates(),
        step_latent=state.step_latent,
        align_target=state.align_target,
        settings={
            "backend": BACKEND,
            "seed": hyper.seed,
            "iterations": iterations,
            "burn_in": burn_in,
            "thin": thin,
            "kappa": ctx.kappa,
            "sigma2": ctx.sigma2,
            "lambda0": ctx.lambda0,
            "lambda1": ctx.lambda1,
            "mu": ctx.mu,
            "top_q": ctx.q if ctx.q != n - 1 else None,
            "p": p,
        },
    )


def save_checkpoint(path, state: ChainState) -> None:
    """Dump a chain state so the run can resume bit-exactly."""
    align = state.align_target if state.align_target is not None else np.empty((0, 0))
    np.savez(
        path,
        format=CHECKPOINT_FORMAT,
        version=CHECKPOINT_VERSION,
        X=state.X,
        r=state.params.r,
        tau0=state.params.tau0,
        tau1=state.params.tau1,
        tau=state.params.tau,
        theta=state.params.theta,
        iteration=state.iteration,
        step_latent=state.step_latent,
        step_theta=state.step_theta,
        counters=np.array([
            state.accept_latent, state.propose_latent,
            state.accept_theta, state.propose_theta,
            state.accept_reach, state.propose_reach,
        ], dtype=np.int64),
        align_target=align,
        rng_state=json.dumps(state.rng.bit_generator.state),
    )


def load_checkpoint(path, ctx: SamplerContext) -> ChainState:
    """Restore a chain state saved by :func:`save_checkpoint`."""
    with np.load(path, allow_pickle=False) as data:
        if str(data["format"]) != CHECKPOINT_FORMAT:
            raise ConfigurationError(f"not a {CHECKPOINT_FORMAT} file: {path}")
        if int(data["version"]) != CHECKPOINT_VERSION:
            raise ConfigurationError(
                f"unsupported checkpoint version {int(data['version'])}"
            )
        params = ModelParams(
            r=data["r"], tau0=float(data["tau0"]), tau1=float(data["tau1"]),
            tau=data["tau"], theta=float(data["theta"]),
        )
        rng = np.random.default_rng()
        rng.bit_generator.state = json.loads(str(data["rng_state"]))
        state = ChainState(
            X=np.ascontiguousarray(data["X"]),
            params=params,
            rng=rng,
            step_latent=float(data["step_latent"]),
            step_theta=float(data["step_theta"]),
            iteration=int(data["iteration"]),
        )
        counters = data["counters"]
        (state.accept_latent, state.propose_latent, state.accept_theta,
         state.propose_theta, state.accept_reach, state.propose_reach) = map(int, counters)
        target = data["align_target"]
        state.align_target = None if target.size == 0 else target
    build_caches(state, ctx)
    return state
