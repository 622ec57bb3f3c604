"""Agent state and the monthly update of the Mark-0 economy.

Firms are stored as a struct of numpy arrays, so every firm-level rule below
is written once and applies to a single firm (length-1 arrays) or to the whole
population.  One call to :func:`step` advances the economy by one month and
keeps the money stock exactly accounted for:

    M = S + sum(max(E_i, 0)) - sum(max(-E_i, 0))

Within a step the order is fixed:

1. close the previous month: bankruptcy pass at the threshold that was in
   force, then revivals of dead slots
2. the bank sets loan/deposit rates so that the default losses just booked
   are recovered through interest on the surviving balances
3. firms revise price, wage and production from last month's demand and
   profit; a productivity change rescales output at a fixed workforce
4. household budget, demand allocation and trade
5. profits, dividends and savings
6. price index, inflation and the threshold that will close this month
7. helicopter drop, if one is scheduled
"""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from mark0.params import EconomyParams

log = logging.getLogger(__name__)

# branch codes shared by the price and wage rules
RAISE, HOLD_HIGH, CUT, HOLD_LOW, BALANCED = 0, 1, 2, 3, 4


@dataclass
class FirmState:
    """Per-firm state, one array entry per firm slot.

    ``production`` is Y_i in goods per month; the workforce is
    ``production / zeta`` at the current productivity.  Dead slots carry zero
    production and zero cash.
    """

    production: np.ndarray
    price: np.ndarray
    wage: np.ndarray
    cash: np.ndarray
    alive: np.ndarray

    def __len__(self) -> int:
        return len(self.price)

    def workforce(self, zeta: float) -> np.ndarray:
        return self.production / zeta


@dataclass
class HouseholdSector:
    savings: float = 0.0
    # scheduled propensity c(t) before the inflation feedback
    consumption_propensity: float = 0.5
    last_budget: float = 0.0
    last_consumption: float = 0.0
    total_wages: float = 0.0


@dataclass
class BankSector:
    base_rate: float = 0.0
    loan_rate: float = 0.0
    deposit_rate: float = 0.0
    default_cost: float = 0.0
    loss_share: float = 0.5
    total_money: float = 0.0


@dataclass
class InflationTracker:
    avg_price: float = 1.0
    avg_wage: float = 1.0
    instant_inflation: float = 0.0
    ema_inflation: float = 0.0
    expected_inflation: float = 0.0


@dataclass
class EconomyState:
    params: EconomyParams
    firms: FirmState
    households: HouseholdSector
    bank: BankSector
    inflation: InflationTracker
    rng: np.random.Generator
    zeta: float
    t: int = 0
    # last month's market outcome, read by the next round of firm decisions
    demand: np.ndarray = field(default=None)  # type: ignore[assignment]
    profit: np.ndarray = field(default=None)  # type: ignore[assignment]
    sales: np.ndarray = field(default=None)  # type: ignore[assignment]
    interest: np.ndarray = field(default=None)  # type: ignore[assignment]
    unemployment: float = 0.0
    avg_fragility: float = 0.0
    n_defaults: int = 0
    n_revivals: int = 0
    theta: float = 3.0
    consumption_propensity: float = 0.5
    degenerate: bool = False

    def copy(self) -> "EconomyState":
        return copy.deepcopy(self)

    @property
    def output(self) -> float:
        return float(self.firms.production.sum())

    def money_residual(self) -> float:
        """S + E+ - E- - M; zero up to rounding when the books balance."""
        return float(self.households.savings + self.firms.cash.sum() - self.bank.total_money)


def initial_state(params: EconomyParams, rng: np.random.Generator) -> EconomyState:
    """Economy at t=0: full employment and zero money in circulation.

    Every firm produces at unit workforce with a price jittered by 1% around
    1 and a unit wage.  Firm i starts with a debt of Phi_i times its payroll,
    Phi_i uniform in ``init_fragility +/- init_fragility_spread``, and the
    household holds the matching deposit, so M = S + sum(E_i) = 0.
    """
    params.validate()
    n = params.n_firms
    production = np.full(n, 1.0 * params.zeta)
    price = 1.0 + 0.01 * (2.0 * rng.random(n) - 1.0)
    wage = np.ones(n)
    lo = params.init_fragility - params.init_fragility_spread
    hi = params.init_fragility + params.init_fragility_spread
    cash = -wage * production * rng.uniform(lo, hi, n)
    firms = FirmState(
        production=production,
        price=price,
        wage=wage,
        cash=cash,
        alive=np.ones(n, dtype=bool),
    )
    tracker = InflationTracker(
        avg_price=float(np.dot(price, production) / production.sum()),
        avg_wage=1.0,
    )
    state = EconomyState(
        params=params,
        firms=firms,
        households=HouseholdSector(savings=float(-cash.sum()), consumption_propensity=params.c0),
        bank=BankSector(loss_share=params.f),
        inflation=tracker,
        rng=rng,
        zeta=params.zeta,
        demand=production.copy(),
        profit=np.zeros(n),
        sales=np.zeros(n),
        interest=np.zeros(n),
        unemployment=0.0,
        theta=params.theta,
        consumption_propensity=params.c0,
    )
    state.avg_fragility = avg_fragility(firms, payroll_scale(params, params.zeta))
    return state


# ---------------------------------------------------------------------------
# households and goods market


def consumption_budget(
    h: HouseholdSector,
    total_wages: float,
    deposit_rate: float,
    ema_inflation: float,
    p: EconomyParams,
) -> float:
    """C_B = c(t) [S + W + rho_d S], floored at zero."""
    c = h.consumption_propensity * (1.0 + p.alpha_c * (ema_inflation - deposit_rate))
    wealth = h.savings + total_wages + deposit_rate * h.savings
    # perishable goods: a negative budget buys nothing
    return max(c * wealth, 0.0)


def allocate_demand(
    budget: float,
    prices: np.ndarray,
    alive: np.ndarray,
    beta: float,
    price_scale: float = 1.0,
) -> np.ndarray:
    """Split the budget over live firms with a logit on price.

    Weights are softmax(-beta * p_i / price_scale); quantities are the budget
    share divided by the price, so ``sum(p * D) == budget``.
    """
    prices = np.asarray(prices, dtype=float)
    alive = np.asarray(alive, dtype=bool)
    demand = np.zeros_like(prices)
    if not alive.any():
        log.warning("no live firm: demand is zero")
        return demand
    x = -beta * prices[alive] / price_scale
    w = np.exp(x - x.max())
    w /= w.sum()
    demand[alive] = budget * w / prices[alive]
    return demand


def trade(prices: np.ndarray, production: np.ndarray, demands: np.ndarray) -> tuple[np.ndarray, float]:
    """Each firm sells min(Y_i, D_i); returns (revenue per firm, total consumption)."""
    sales = np.asarray(prices) * np.minimum(production, demands)
    return sales, float(sales.sum())


# ---------------------------------------------------------------------------
# firms


def fragility(cash: np.ndarray, wage: np.ndarray, workforce: np.ndarray) -> np.ndarray:
    """Debt-to-payroll ratio -E_i / (W_i N_i).

    A firm without workers has fragility +inf if indebted and 0 otherwise.
    """
    cash = np.asarray(cash, dtype=float)
    payroll = np.asarray(wage, dtype=float) * np.asarray(workforce, dtype=float)
    out = np.zeros(np.broadcast(cash, payroll).shape)
    pos = payroll > 0
    np.divide(-cash, payroll, out=out, where=pos)
    out[~pos & (cash < 0)] = np.inf
    return out


def payroll_scale(p: EconomyParams, zeta: float) -> float:
    """Output per unit of payroll used when measuring fragility.

    ``"workforce"`` divides debt by the actual wage bill W_i Y_i / zeta;
    ``"output"`` divides by W_i Y_i, the wage bill the firm's current output
    would carry at unit productivity, so a productivity shock shows up as
    higher fragility.
    """
    return zeta if p.fragility_basis == "workforce" else 1.0


def avg_fragility(firms: FirmState, zeta: float) -> float:
    """Production-weighted mean fragility over live producing firms.

    ``zeta`` is the output-per-worker used for the payroll, see
    :func:`payroll_scale`.
    """
    mask = firms.alive & (firms.production > 0) & (firms.wage > 0)
    total = firms.production[mask].sum()
    if total <= 0:
        return 0.0
    # Phi_i * Y_i = -E_i * zeta / W_i
    return float((-firms.cash[mask] * zeta / firms.wage[mask]).sum() / total)


def fragility_coupling(loan_rate: float, ema_inflation: float, p: EconomyParams) -> float:
    return max(p.alpha_gamma * (loan_rate - ema_inflation), p.gamma0)


def eta_coefficients(phi: np.ndarray, coupling: float, p: EconomyParams) -> tuple[np.ndarray, np.ndarray]:
    """Hiring and firing speeds (eta+, eta-), clipped to [0, 1]."""
    phi = np.asarray(phi, dtype=float)
    if coupling == 0.0:
        return np.full(phi.shape, min(p.eta0_plus, 1.0)), np.full(phi.shape, min(p.eta0_minus, 1.0))
    with np.errstate(invalid="ignore"):
        eta_plus = np.clip(np.nan_to_num(p.eta0_plus * (1.0 - coupling * phi), nan=0.0), 0.0, 1.0)
        eta_minus = np.clip(np.nan_to_num(p.eta0_minus * (1.0 + coupling * phi), nan=1.0), 0.0, 1.0)
    return eta_plus, eta_minus


def u_star_share(
    wages: np.ndarray,
    alive: np.ndarray,
    avg_wage: float,
    beta: float,
    total_unemployed: float,
) -> np.ndarray:
    """Number of unemployed workers each live firm can reach.

    The pool is split with softmax(beta * W_i / avg_wage) over live firms.
    """
    wages = np.asarray(wages, dtype=float)
    alive = np.asarray(alive, dtype=bool)
    out = np.zeros_like(wages)
    if total_unemployed <= 0 or not alive.any():
        return out
    x = beta * wages[alive] / avg_wage
    w = np.exp(x - x.max())
    out[alive] = total_unemployed * w / w.sum()
    return out


def update_production(
    production: np.ndarray,
    demand: np.ndarray,
    hireable: np.ndarray,
    eta_plus: np.ndarray,
    eta_minus: np.ndarray,
    zeta: float,
) -> np.ndarray:
    y = np.asarray(production, dtype=float)
    d = np.asarray(demand, dtype=float)
    up = y + np.minimum(eta_plus * (d - y), zeta * np.asarray(hireable))
    down = y - eta_minus * (y - d)
    out = np.where(y < d, up, np.where(y > d, down, y))
    return np.maximum(out, 0.0)


def price_branches(production: np.ndarray, demand: np.ndarray, price: np.ndarray, avg_price: float) -> np.ndarray:
    y, d, pr = np.asarray(production), np.asarray(demand), np.asarray(price)
    return np.select(
        [(y < d) & (pr < avg_price), y < d, (y > d) & (pr > avg_price), y > d],
        [RAISE, HOLD_HIGH, CUT, HOLD_LOW],
        default=BALANCED,
    )


def update_price(
    price: np.ndarray,
    production: np.ndarray,
    demand: np.ndarray,
    avg_price: float,
    expected_inflation: float,
    gamma: float,
    xi: np.ndarray,
) -> np.ndarray:
    price = np.asarray(price, dtype=float)
    branch = price_branches(production, demand, price, avg_price)
    drift = 1.0 + expected_inflation
    out = price.copy()
    raise_ = branch == RAISE
    cut = branch == CUT
    out[raise_] = (price * (1.0 + gamma * xi) * drift)[raise_]
    out[cut] = (price * (1.0 - gamma * xi) * drift)[cut]
    return out


def wage_branches(production: np.ndarray, demand: np.ndarray, profit: np.ndarray) -> np.ndarray:
    y, d, pf = np.asarray(production), np.asarray(demand), np.asarray(profit)
    return np.select(
        [(y < d) & (pf > 0), y < d, (y > d) & (pf < 0), y > d],
        [RAISE, HOLD_HIGH, CUT, HOLD_LOW],
        default=BALANCED,
    )


def zero_profit_wage(sales: np.ndarray, interest: np.ndarray, workforce: np.ndarray) -> np.ndarray:
    """Wage at which last month's profit would have been exactly zero."""
    workforce = np.asarray(workforce, dtype=float)
    num = np.asarray(sales, dtype=float) + np.asarray(interest, dtype=float)
    return np.divide(num, workforce, out=np.full(workforce.shape, np.inf), where=workforce > 0)


def update_wage(
    wage: np.ndarray,
    production: np.ndarray,
    demand: np.ndarray,
    profit: np.ndarray,
    unemployment: float,
    phi: np.ndarray,
    coupling: float,
    p: EconomyParams,
    xi: np.ndarray,
    expected_inflation: float = 0.0,
    max_wage: np.ndarray | None = None,
) -> np.ndarray:
    """Wage revision.

    ``max_wage`` is the zero-profit wage; a raise that would have turned last
    month's profit negative is capped there.
    """
    wage = np.asarray(wage, dtype=float)
    branch = wage_branches(production, demand, profit)
    index = 1.0 + p.g * expected_inflation
    gphi = 0.0 if coupling == 0.0 else coupling * np.asarray(phi)
    out = wage.copy()
    raise_ = branch == RAISE
    cut = branch == CUT
    # a raise never turns into a cut and a cut never exceeds the whole wage,
    # as with the hiring and firing speeds
    with np.errstate(invalid="ignore"):
        up_speed = np.nan_to_num(np.maximum(p.gamma * (1.0 - gphi), 0.0), nan=0.0)
        down_speed = np.nan_to_num(np.minimum(p.gamma * (1.0 + gphi), 1.0), nan=1.0)
    up = wage * (1.0 + up_speed * (1.0 - unemployment) * xi) * index
    if max_wage is not None:
        up = np.minimum(up, max_wage)
    down = wage * np.maximum(1.0 - down_speed * unemployment * xi, 0.0) * index
    out[raise_] = np.broadcast_to(up, wage.shape)[raise_]
    out[cut] = np.broadcast_to(down, wage.shape)[cut]
    return out


def interest_income(cash: np.ndarray, loan_rate: float, deposit_rate: float) -> np.ndarray:
    """Deposit interest earned minus loan interest paid."""
    cash = np.asarray(cash, dtype=float)
    return deposit_rate * np.maximum(cash, 0.0) - loan_rate * np.maximum(-cash, 0.0)


def firm_profit(
    price: np.ndarray,
    production: np.ndarray,
    demand: np.ndarray,
    wage: np.ndarray,
    cash: np.ndarray,
    loan_rate: float,
    deposit_rate: float,
    zeta: float = 1.0,
) -> np.ndarray:
    """Sales minus wage bill plus net interest; loan interest is a cost."""
    sales = np.asarray(price) * np.minimum(production, demand)
    wage_bill = np.asarray(wage) * np.asarray(production) / zeta
    return sales - wage_bill + interest_income(cash, loan_rate, deposit_rate)


def pay_dividends(cash: np.ndarray, profits: np.ndarray, delta: float) -> tuple[np.ndarray, float]:
    """Firms with positive profit and positive cash pay out delta * E_i.

    Returns the cash after payout and the total paid to households.
    """
    cash = np.asarray(cash, dtype=float)
    pays = (np.asarray(profits) > 0) & (cash > 0)
    div = np.where(pays, delta * cash, 0.0)
    return cash - div, float(div.sum())


def bankruptcies_and_revivals(
    firms: FirmState,
    theta: float,
    phi: float,
    avg_price: float,
    avg_wage: float,
    zeta: float,
    revive_draw: np.ndarray,
    size_draw: np.ndarray,
    basis: float | None = None,
) -> tuple[float, int, int]:
    """Default firms with fragility >= theta, then revive dead slots.

    Mutates ``firms``.  A revived firm starts with the average price and wage,
    no cash, and output ``xi * zeta * u`` where u is the unemployment rate
    after the defaults.  Returns (default cost, defaults, revivals).
    """
    n = len(firms)
    alive = firms.alive
    # -E >= theta * W * N, without dividing by the payroll
    debt = -firms.cash
    payroll = firms.wage * firms.production / (zeta if basis is None else basis)
    if np.isinf(theta):
        failing = np.zeros(n, dtype=bool)
    else:
        failing = alive & (firms.cash < 0) & (debt >= theta * payroll)
    default_cost = float(debt[failing].sum())
    n_defaults = int(failing.sum())
    firms.alive[failing] = False
    firms.cash[failing] = 0.0
    firms.production[failing] = 0.0

    dead = ~firms.alive
    reviving = dead & (revive_draw < phi)
    n_revivals = int(reviving.sum())
    if n_revivals:
        u = max(1.0 - firms.production.sum() / zeta / n, 0.0)
        firms.alive[reviving] = True
        firms.price[reviving] = avg_price
        firms.wage[reviving] = avg_wage
        firms.cash[reviving] = 0.0
        firms.production[reviving] = size_draw[reviving] * zeta * u
    return default_cost, n_defaults, n_revivals


# ---------------------------------------------------------------------------
# banking sector and price index


def taylor_rate(ema_inflation: float, p: EconomyParams) -> float:
    return p.rho_star + p.phi_pi * (ema_inflation - p.pi_target)


def set_rates(
    base_rate: float,
    default_cost: float,
    total_debt: float,
    total_deposits_firms: float,
    savings: float,
    f: float,
) -> tuple[float, float]:
    """Loan and deposit rates that pass default losses on to borrowers (share f)
    and depositors (share 1 - f).

    With no borrowers left the whole loss falls on depositors; with no
    deposits the deposit rate is zero.
    """
    if total_debt > 0:
        loan_rate = base_rate + f * default_cost / total_debt
        depositor_loss = (1.0 - f) * default_cost
    else:
        loan_rate = base_rate
        depositor_loss = default_cost
    deposits = savings + total_deposits_firms
    if deposits > 0:
        deposit_rate = (base_rate * total_debt - depositor_loss) / deposits
    else:
        deposit_rate = 0.0
    return loan_rate, deposit_rate


def weighted_means(firms: FirmState) -> tuple[float, float, float]:
    """(pbar, wbar, total output) over live firms, weighted by production."""
    y = np.where(firms.alive, firms.production, 0.0)
    total = float(y.sum())
    if total <= 0:
        return float("nan"), float("nan"), 0.0
    return float(np.dot(firms.price, y) / total), float(np.dot(firms.wage, y) / total), total


def update_inflation(tracker: InflationTracker, firms: FirmState, p: EconomyParams) -> InflationTracker:
    pbar, wbar, total = weighted_means(firms)
    if total <= 0:
        log.warning("zero total production: price index carried over")
        pbar, wbar, pi = tracker.avg_price, tracker.avg_wage, 0.0
    else:
        pi = (pbar - tracker.avg_price) / tracker.avg_price
    ema = p.omega * pi + (1.0 - p.omega) * tracker.ema_inflation
    return InflationTracker(
        avg_price=pbar,
        avg_wage=wbar,
        instant_inflation=pi,
        ema_inflation=ema,
        expected_inflation=p.tau_r * ema + p.tau_t * p.pi_target,
    )


def unemployment_rate(firms: FirmState, zeta: float) -> float:
    employed = firms.production.sum() / zeta
    # rounding in the hire/fire sums can leave a -1e-16 residue
    return min(max(1.0 - employed / len(firms), 0.0), 1.0)


# ---------------------------------------------------------------------------
# one month


def step(
    state: EconomyState,
    c_t: float,
    zeta_t: float,
    theta_t: float | Callable[["EconomyState"], float],
    kappa: float | None = None,
) -> EconomyState:
    """Advance ``state`` by one month in place and return it.

    ``theta_t`` is the bankruptcy threshold that will close this month (the
    pass itself runs at the start of the next call).  It may be a callable of
    the post-trade state, for thresholds that track the current fragility.
    """
    p = state.params
    firms = state.firms
    n = len(firms)
    draws = state.rng.random((4, n))
    xi_price, xi_wage, revive_draw, size_draw = draws
    tracker = state.inflation
    bank = state.bank
    hh = state.households
    zeta_prev = state.zeta

    # 1. close last month: bankruptcy pass at the threshold then in force
    was_alive = firms.alive.copy()
    default_cost, n_def, n_rev = bankruptcies_and_revivals(
        firms,
        state.theta,
        p.phi,
        tracker.avg_price,
        tracker.avg_wage,
        zeta_prev,
        revive_draw,
        size_draw,
        basis=payroll_scale(p, zeta_prev),
    )
    newborn = firms.alive & ~was_alive
    if n_rev:
        # no market history yet: a newborn holds price, wage and output this month
        state.demand[newborn] = firms.production[newborn]
        state.profit[newborn] = 0.0
        state.sales[newborn] = 0.0
        state.interest[newborn] = 0.0

    # 2. rates, on the post-default balances that interest is charged on
    cash = firms.cash
    e_plus = float(np.maximum(cash, 0.0).sum())
    e_minus = float(np.maximum(-cash, 0.0).sum())
    bank.base_rate = taylor_rate(tracker.ema_inflation, p)
    bank.default_cost = default_cost
    bank.loan_rate, bank.deposit_rate = set_rates(
        bank.base_rate, default_cost, e_minus, e_plus, hh.savings, p.f
    )

    # 3. firm decisions on last month's market
    alive = firms.alive
    y_old = firms.production
    workforce_old = y_old / zeta_prev
    phi_old = fragility(firms.cash, firms.wage, y_old / payroll_scale(p, zeta_prev))
    coupling = fragility_coupling(bank.loan_rate, tracker.ema_inflation, p)
    eta_plus, eta_minus = eta_coefficients(phi_old, coupling, p)
    unemployed = max(n - workforce_old.sum(), 0.0)
    hireable = u_star_share(firms.wage, alive, tracker.avg_wage, p.beta, unemployed)

    new_price = update_price(
        firms.price, y_old, state.demand, tracker.avg_price, tracker.expected_inflation, p.gamma, xi_price
    )
    new_y = update_production(y_old, state.demand, hireable, eta_plus, eta_minus, zeta_prev)
    new_wage = update_wage(
        firms.wage,
        y_old,
        state.demand,
        state.profit,
        state.unemployment,
        phi_old,
        coupling,
        p,
        xi_wage,
        tracker.expected_inflation,
        zero_profit_wage(state.sales, state.interest, workforce_old),
    )
    firms.price = np.where(alive, new_price, firms.price)
    firms.wage = np.where(alive, new_wage, firms.wage)
    # productivity shocks act on output at a fixed workforce
    firms.production = np.where(alive, new_y, 0.0) * (zeta_t / zeta_prev)
    state.zeta = zeta_t

    # 4. goods market
    wage_bill = np.where(firms.alive, firms.wage * firms.production / zeta_t, 0.0)
    total_wages = float(wage_bill.sum())
    hh.consumption_propensity = c_t
    budget = consumption_budget(hh, total_wages, bank.deposit_rate, tracker.ema_inflation, p)
    pbar_now, _, total_y = weighted_means(firms)
    state.degenerate = total_y <= 0 or not firms.alive.any()
    scale = pbar_now if (p.normalized_demand and total_y > 0) else 1.0
    demand = allocate_demand(budget, firms.price, firms.alive, p.beta, scale)
    sales, consumed = trade(firms.price, firms.production, demand)

    # 5. accounting
    interest = np.where(firms.alive, interest_income(cash, bank.loan_rate, bank.deposit_rate), 0.0)
    profit = sales - wage_bill + interest
    firms.cash = cash + profit
    firms.cash, dividends = pay_dividends(firms.cash, profit, p.delta)
    hh.savings = hh.savings + total_wages + bank.deposit_rate * hh.savings - consumed + dividends
    hh.last_budget = budget
    hh.last_consumption = consumed
    hh.total_wages = total_wages

    state.demand = demand
    state.profit = profit
    state.sales = sales
    state.interest = interest

    # 6. price index
    state.inflation = update_inflation(tracker, firms, p)
    state.unemployment = unemployment_rate(firms, zeta_t)
    state.avg_fragility = avg_fragility(firms, payroll_scale(p, zeta_t))
    state.n_defaults = n_def
    state.n_revivals = n_rev
    # the pass closing this month runs at the start of the next step
    state.theta = float(theta_t(state)) if callable(theta_t) else float(theta_t)
    state.consumption_propensity = c_t

    # 7. policy
    if kappa is not None:
        apply_helicopter(state, kappa)

    state.t += 1
    return state


def apply_helicopter(state: EconomyState, kappa: float) -> EconomyState:
    """Multiply household savings by kappa, creating (kappa - 1) S of new money."""
    s = state.households.savings
    if s <= 0:
        log.warning("helicopter drop skipped at t=%d: savings %.6g <= 0", state.t, s)
        return state
    extra = (kappa - 1.0) * s
    state.households.savings = s + extra
    state.bank.total_money += extra
    return state
