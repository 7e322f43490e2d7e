"""Experiment harness: payoff matrices from GPP populations, offline and
online portfolio evaluations, and report files."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bandit import LearningCurve, checkpoints, curve_from_batch, learning_curve
from .kernels.ucbt import run_batch
from .gpp import EngineFailure, GppSpec, ProtocolError, get_engine, play_game
from .matrix_game import InvalidInput, MixedStrategy, PayoffMatrix, as_matrix, exploitability, solve_exact
from .portfolio import build_best_arm, build_best_half, build_exploiter, build_nash, build_uniform

log = logging.getLogger(__name__)

POLICIES = ("nash", "best-arm", "best-half", "uniform")


class ConfigError(InvalidInput):
    pass


class MatrixBuildError(RuntimeError):
    def __init__(self, message, partial: np.ndarray, failures: dict):
        super().__init__(message)
        self.partial = partial
        self.failures = failures


def parse_seed_range(text) -> list:
    """``"1..16"`` -> [1, ..., 16]; also accepts ``"3"``, ``"1,4,9"`` or a list."""
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    text = str(text).strip()
    out = []
    try:
        for part in text.split(","):
            if ".." in part:
                a, b = part.split("..", 1)
                a, b = int(a), int(b)
                if b < a:
                    raise ConfigError(f"empty seed range {part!r}")
                out.extend(range(a, b + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise ConfigError(f"bad seed range {text!r}; expected e.g. 1..16 or 1,4,9") from None
    if not out:
        raise ConfigError(f"no seeds in {text!r}")
    if len(set(out)) != len(out):
        raise ConfigError(f"duplicate seeds in {text!r}")
    return out


@dataclass
class ExperimentConfig:
    game: str = "connect4"
    sims: int = 300
    black_seeds: list = field(default_factory=lambda: list(range(1, 17)))
    white_seeds: list = field(default_factory=lambda: list(range(1, 17)))
    # each entry {"sims": int, "exploration": float}; replaces seeds when set
    variants: list = field(default_factory=list)
    repeats: int = 1
    k_grid: list = field(default_factory=lambda: [4, 8, 12])
    replications: int = 100
    online_replications: int = 1000
    online_iterations: int = 1 << 14
    opponent: str = "uniform"
    role: str = "black"
    mc_games: int = 10_000
    master_seed: int = 0
    output_dir: str = "out"
    matrix: str | None = None

    def __post_init__(self):
        self.black_seeds = parse_seed_range(self.black_seeds)
        self.white_seeds = parse_seed_range(self.white_seeds)
        self.k_grid = [int(k) for k in self.k_grid]
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if self.sims < 1:
            raise ConfigError("sims must be >= 1")
        if self.role not in ("black", "white"):
            raise ConfigError("role must be black or white")
        n = min(self.n_black, self.n_white)
        for k in self.k_grid:
            if not 1 <= k <= n:
                raise ConfigError(f"K={k} must lie in 1..{n}")
        get_engine(self.game)

    @property
    def stochastic(self) -> bool:
        return bool(self.variants)

    @property
    def n_black(self) -> int:
        return len(self.variants) or len(self.black_seeds)

    @property
    def n_white(self) -> int:
        return len(self.variants) or len(self.white_seeds)

    def black_specs(self) -> list:
        if self.variants:
            return [self._variant(i, v) for i, v in enumerate(self.variants)]
        return [GppSpec(self.game, s, simulations_per_move=self.sims) for s in self.black_seeds]

    def white_specs(self) -> list:
        if self.variants:
            # offset seeds so Black and White variants draw different streams
            return [self._variant(i, v, offset=1_000_003) for i, v in enumerate(self.variants)]
        return [GppSpec(self.game, s, simulations_per_move=self.sims) for s in self.white_seeds]

    def _variant(self, i, v, offset=0):
        return GppSpec(
            self.game,
            seed=self.master_seed * 7919 + i + offset,
            simulations_per_move=int(v.get("sims", self.sims)),
            exploration=float(v.get("exploration", 2.0**0.5)),
            stochastic=True,
        )

    def labels(self) -> tuple:
        if self.variants:
            names = [f"v{i}" for i in range(len(self.variants))]
            return tuple("b" + n for n in names), tuple("w" + n for n in names)
        return tuple(f"b{s}" for s in self.black_seeds), tuple(f"w{s}" for s in self.white_seeds)

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            return cls(**d)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        cfg = cls.from_dict(d)
        if cfg.matrix and not Path(cfg.matrix).is_absolute():
            cfg.matrix = str((Path(path).parent / cfg.matrix).resolve())
        return cfg


def data_path(name: str) -> Path:
    """Path of a file shipped in ``seedfolio/data`` (fixture matrices and configs)."""
    from importlib.resources import files

    path = Path(str(files("seedfolio") / "data" / name))
    if not path.exists():
        raise ConfigError(f"no bundled data file {name!r}")
    return path


def default_jobs() -> int:
    env = os.environ.get("SEEDFOLIO_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class MatrixBuild:
    matrix: PayoffMatrix
    stderr: np.ndarray
    repeats: int


def play_matrix(black_specs, white_specs, game: str, repeats: int = 1, labels=None, jobs: int | None = None) -> MatrixBuild:
    """Mean Black score of every (black, white) pairing over ``repeats`` games.

    Cells run concurrently and land by index, so the result does not depend
    on scheduling. Deterministic specs make repeats pointless and are
    coerced to a single game per cell.
    """
    engine = get_engine(game)
    stochastic = any(s.stochastic for s in black_specs) or any(s.stochastic for s in white_specs)
    if repeats > 1 and not stochastic:
        warnings.warn(f"deterministic agents: repeats={repeats} coerced to 1", stacklevel=2)
        repeats = 1
    kb, kw = len(black_specs), len(white_specs)
    scores = np.full((kb, kw, repeats), np.nan)
    failures = {}

    def cell(ij):
        i, j = ij
        try:
            for r in range(repeats):
                scores[i, j, r] = play_game(engine, black_specs[i], white_specs[j], nonce=r).black_score
        except (EngineFailure, ProtocolError) as exc:
            failures[(i, j)] = f"{type(exc).__name__}: {exc}"

    cells = [(i, j) for i in range(kb) for j in range(kw)]
    jobs = jobs or default_jobs()
    if jobs == 1:
        for ij in cells:
            cell(ij)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(cell, cells))
    mean = scores.mean(axis=2)
    if failures:
        raise MatrixBuildError(f"{len(failures)} of {len(cells)} cells failed", mean, failures)
    if repeats > 1:
        stderr = scores.std(axis=2, ddof=1) / np.sqrt(repeats)
    else:
        stderr = np.zeros((kb, kw))
    if labels is None:
        labels = ([f"b{i}" for i in range(kb)], [f"w{j}" for j in range(kw)])
    return MatrixBuild(PayoffMatrix(mean, tuple(labels[0]), tuple(labels[1])), stderr, repeats)


def build_matrix(config: ExperimentConfig, jobs: int | None = None) -> PayoffMatrix:
    return build_matrix_stats(config, jobs).matrix


def build_matrix_stats(config: ExperimentConfig, jobs: int | None = None) -> MatrixBuild:
    return play_matrix(
        config.black_specs(),
        config.white_specs(),
        config.game,
        config.repeats,
        labels=config.labels(),
        jobs=jobs,
    )


# -- offline evaluation -----------------------------------------------------


@dataclass
class Matchup:
    name: str
    black: str
    white: str
    reported_for: str
    win_rate: float
    black_win_rate: float
    black_strategy: MixedStrategy = field(repr=False)
    white_strategy: MixedStrategy = field(repr=False)

    @property
    def caption(self) -> str:
        who = self.black if self.reported_for == "black" else self.white
        return f"win rate of {who} as {self.reported_for} ({self.black} black vs {self.white} white)"


@dataclass
class EvaluationReport:
    value: float
    matchups: list
    support: dict
    exploitability: dict
    matrix_digest: str
    config_digest: str = ""

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "support": self.support,
            "exploitability": self.exploitability,
            "matchups": [
                {
                    "name": m.name,
                    "caption": m.caption,
                    "black": m.black,
                    "white": m.white,
                    "reported_for": m.reported_for,
                    "win_rate": m.win_rate,
                }
                for m in self.matchups
            ],
            "matrix_digest": self.matrix_digest,
            "config_digest": self.config_digest,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["matchup", "black", "white", "reported_for", "win_rate", "caption"])
        w.writerow(["V", "nash", "nash", "black", repr(self.value), "game value (Black's win rate at equilibrium)"])
        for m in self.matchups:
            w.writerow([m.name, m.black, m.white, m.reported_for, repr(m.win_rate), m.caption])
        return buf.getvalue()


def cross_evaluate(m) -> EvaluationReport:
    """Analytic pairings between the offline portfolios, in both roles."""
    m = as_matrix(m)
    a = m.entries
    nash = build_nash(m)
    arm = build_best_arm(m)
    half = build_best_half(m)
    uni = build_uniform(m.n_rows, m.n_cols)
    pols = {"nash": nash, "best-arm": arm, "best-half": half, "uniform": uni}

    def pair(name, black, white, reported_for):
        p = pols[black].black_strategy
        q = pols[white].white_strategy
        bw = float(p.probs @ a @ q.probs)
        rate = bw if reported_for == "black" else 1.0 - bw
        return Matchup(name, black, white, reported_for, rate, bw, p, q)

    matchups = [
        pair("Nash(1) vs Unif(2)", "nash", "uniform", "black"),
        pair("Nash(2) vs Unif(1)", "uniform", "nash", "black"),
        pair("Nash(2) vs BestArm(1)", "best-arm", "nash", "white"),
        pair("Nash(1) vs BestArm(2)", "nash", "best-arm", "black"),
        pair("BestArm(1) vs Unif(2)", "best-arm", "uniform", "black"),
        pair("BestArm(2) vs Unif(1)", "uniform", "best-arm", "white"),
        pair("BestHalf(1) vs Unif(2)", "best-half", "uniform", "black"),
        pair("BestHalf(2) vs Unif(1)", "uniform", "best-half", "white"),
        pair("Nash(2) vs BestHalf(1)", "best-half", "nash", "white"),
        pair("Nash(1) vs BestHalf(2)", "nash", "best-half", "black"),
    ]
    value = nash.metadata["value"]
    expl = {}
    for name, pol in pols.items():
        e1, e2, mean = exploitability(m, pol.black_strategy, pol.white_strategy, value)
        expl[name] = {"black": e1, "white": e2, "mean": mean}
    support = {
        name: {"black": len(pol.black_strategy.support), "white": len(pol.white_strategy.support)}
        for name, pol in pols.items()
    }
    return EvaluationReport(value, matchups, support, expl, m.digest())


def simulate_matchup(m, matchup: Matchup, games: int, seed: int = 0) -> tuple:
    """Monte Carlo estimate of a matchup: ``(mean, standard error)``.

    Each game draws both options from the policies. Entries in {0, 0.5, 1}
    are deterministic game results and are used as is; other entries are win
    rates and yield a Bernoulli outcome.
    """
    m = as_matrix(m)
    rng = np.random.default_rng(seed)
    p = matchup.black_strategy.probs
    q = matchup.white_strategy.probs
    i = np.minimum(np.searchsorted(np.cumsum(p), rng.random(games), side="right"), p.size - 1)
    j = np.minimum(np.searchsorted(np.cumsum(q), rng.random(games), side="right"), q.size - 1)
    cell = m.entries[i, j]
    deterministic = np.isin(m.entries, (0.0, 0.5, 1.0)).all()
    if deterministic:
        black = cell
    else:
        black = (rng.random(games) < cell).astype(np.float64)
    outcome = black if matchup.reported_for == "black" else 1.0 - black
    return float(outcome.mean()), float(outcome.std(ddof=1) / np.sqrt(games))


@dataclass
class GeneralizationReport:
    k_grid: list
    replications: int
    # rows of (K, policy, opponent, role, mean, stderr)
    rows: list

    def lookup(self, k, policy, opponent, role="both") -> tuple:
        for r in self.rows:
            if r[0] == k and r[1] == policy and r[2] == opponent and r[3] == role:
                return r[4], r[5]
        raise KeyError((k, policy, opponent, role))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["K", "policy", "opponent", "role", "mean", "stderr", "replications", "quantity"])
        for k, pol, opp, role, mean, se in self.rows:
            quantity = "loss rate" if opp == "exploiter" else "win rate"
            w.writerow([k, pol, opp, role, repr(mean), repr(se), self.replications, quantity])
        return buf.getvalue()


def learning_split(n_black, n_white, k, replications, rng):
    """Learning-set indices for one replication.

    A single replication uses the leading K options; more replications draw
    random subsets from ``rng``.
    """
    if replications == 1:
        return np.arange(k), np.arange(k)
    rows = np.sort(rng.choice(n_black, size=k, replace=False))
    cols = np.sort(rng.choice(n_white, size=k, replace=False))
    return rows, cols


def _policy_pair(kind, sub: PayoffMatrix):
    if kind == "nash":
        pol = build_nash(sub)
    elif kind == "best-arm":
        pol = build_best_arm(sub)
    elif kind == "best-half":
        pol = build_best_half(sub)
    else:
        pol = build_uniform(sub.n_rows, sub.n_cols)
    return pol.black_strategy.probs, pol.white_strategy.probs


def generalization_experiment(m_full, k_grid, replications: int = 100, seed: int = 0, policies=POLICIES) -> GeneralizationReport:
    """Learn portfolios on K x K blocks, score them on the held-out options.

    Two opponents: the uniform mixture over held-out options (win rate) and
    the exploiter, the held-out option that best answers the policy's exact
    distribution (loss rate). Each is reported per role and role-balanced.
    """
    m = as_matrix(m_full)
    a = m.entries
    nb, nw = m.shape
    for k in k_grid:
        if not 1 <= k < min(nb, nw):
            raise ConfigError(f"K={k} leaves no held-out options (N = {min(nb, nw)})")
    rng = np.random.default_rng(seed)
    rows_out = []
    for k in k_grid:
        acc = {(pol, opp, role): [] for pol in policies for opp in ("uniform", "exploiter") for role in ("black", "white", "both")}
        for _ in range(replications):
            lr, lc = learning_split(nb, nw, k, replications, rng)
            hr = np.setdiff1d(np.arange(nb), lr)
            hc = np.setdiff1d(np.arange(nw), lc)
            sub = m.submatrix(lr, lc)
            vs_held_cols = a[np.ix_(lr, hc)]
            vs_held_rows = a[np.ix_(hr, lc)]
            for pol in policies:
                p, q = _policy_pair(pol, sub)
                win_b = float(p @ vs_held_cols.mean(axis=1))
                win_w = float(1.0 - vs_held_rows.mean(axis=0) @ q)
                _, loss_b = build_exploiter(vs_held_cols, p, "row")
                _, loss_w = build_exploiter(vs_held_rows, q, "col")
                for opp, b, w in (("uniform", win_b, win_w), ("exploiter", loss_b, loss_w)):
                    acc[(pol, opp, "black")].append(b)
                    acc[(pol, opp, "white")].append(w)
                    acc[(pol, opp, "both")].append(0.5 * (b + w))
        for (pol, opp, role), vals in acc.items():
            v = np.array(vals)
            se = float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else 0.0
            rows_out.append((k, pol, opp, role, float(v.mean()), se))
    return GeneralizationReport(list(k_grid), replications, rows_out)


# -- online ------------------------------------------------------------------


def opponent_strategy(m: PayoffMatrix, opponent_kind: str, ucbt_role: str) -> MixedStrategy:
    """The stationary opponent's mixed strategy over its own axis."""
    n = m.n_cols if ucbt_role == "black" else m.n_rows
    if opponent_kind == "uniform":
        return MixedStrategy.uniform(n)
    if opponent_kind == "nash":
        eq = solve_exact(m)
        return eq.col_strategy if ucbt_role == "black" else eq.row_strategy
    if opponent_kind.startswith("pure:"):
        j = int(opponent_kind.split(":", 1)[1])
        if not 0 <= j < n:
            raise ConfigError(f"pure opponent index {j} out of range 0..{n - 1}")
        return MixedStrategy.pure(n, j)
    raise ConfigError(f"unknown opponent {opponent_kind!r}")


def arm_win_probs(m: PayoffMatrix, opponent: MixedStrategy, ucbt_role: str) -> np.ndarray:
    if ucbt_role == "black":
        return m.entries @ opponent.probs
    return 1.0 - opponent.probs @ m.entries


def online_experiment(m, opponent_kind: str, iterations: int, replications: int, role: str = "black", seed: int = 0) -> LearningCurve:
    """UCBT over one role's options against a fixed opponent portfolio.

    Each game's outcome is a Bernoulli draw with the chosen arm's exact win
    probability against the opponent's mixed strategy.
    """
    m = as_matrix(m)
    opp = opponent_strategy(m, opponent_kind, role)
    return learning_curve(arm_win_probs(m, opp, role), iterations, replications, seed)


def live_oracle(config: ExperimentConfig, opponent: GppSpec, role: str = "black"):
    """Win/loss oracle that plays real games against ``opponent``.

    Deterministic specs are cached per arm since replays cannot differ.
    """
    engine = get_engine(config.game)
    specs = config.black_specs() if role == "black" else config.white_specs()
    cache = {}

    def oracle(arm, game_index, rng):
        spec = specs[arm]
        nonce = int(rng.integers(1 << 31)) if (spec.stochastic or opponent.stochastic) else 0
        if nonce == 0 and arm in cache:
            return cache[arm]
        if role == "black":
            won = play_game(engine, spec, opponent, nonce).black_score == 1.0
        else:
            won = play_game(engine, opponent, spec, nonce).black_score == 0.0
        if nonce == 0:
            cache[arm] = won
        return won

    return oracle


def deterministic_opponent_trials(m, portfolio_size: int, games: int, replications: int, seed: int = 0) -> dict:
    """UCBT over random seed portfolios against a beatable fixed opponent.

    For each replication: draw ``portfolio_size`` rows, then a column that at
    least one of them beats outright. Against a deterministic opponent every
    game result is fixed, so an arm wins with probability 1 if its entry is 1
    and 0 otherwise (draws included). Returns per-replication losses in games
    1..games/2 and games/2+1..games, plus the sampled rows and columns.
    """
    m = as_matrix(m)
    a = m.entries
    rng = np.random.default_rng(seed)
    probs = np.empty((replications, portfolio_size))
    portfolios = np.empty((replications, portfolio_size), dtype=np.int64)
    opponents = np.empty(replications, dtype=np.int64)
    for r in range(replications):
        rows = rng.choice(m.n_rows, size=portfolio_size, replace=False)
        beatable = np.flatnonzero((a[rows] == 1.0).any(axis=0))
        if beatable.size == 0:
            raise InvalidInput("no column is beaten outright by the sampled portfolio")
        j = int(rng.choice(beatable))
        portfolios[r] = rows
        opponents[r] = j
        probs[r] = (a[rows, j] == 1.0).astype(np.float64)
    cps = checkpoints(games)
    if games % 2 or games // 2 not in cps:
        raise InvalidInput("games must be a power of two")
    batch = run_batch(probs, games, seed, checkpoints=cps)
    cum = batch[0]
    half = games // 2
    lost_first = np.rint(cum[:, -2] * half).astype(np.int64)
    lost_total = np.rint(cum[:, -1] * games).astype(np.int64)
    return {
        "losses_first_half": lost_first,
        "losses_second_half": lost_total - lost_first,
        "portfolios": portfolios,
        "opponents": opponents,
        "curve": curve_from_batch(cps, batch),
    }


# -- reports -----------------------------------------------------------------


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def write_manifest(out_dir, config: ExperimentConfig, outputs, extra=None, name: str = "manifest.json") -> Path:
    """Everything needed to rerun: config, its digest, version, output digests."""
    out_dir = Path(out_dir)
    digests = {}
    for fname in sorted(outputs):
        digests[fname] = hashlib.sha256((out_dir / fname).read_bytes()).hexdigest()
    manifest = {
        "tool": "seedfolio",
        "version": __version__,
        "config": config.to_dict(),
        "config_digest": config.digest(),
        "master_seed": config.master_seed,
        "outputs": digests,
    }
    if extra:
        manifest.update(extra)
    path = out_dir / name
    write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
