"""Shared oracles and fixtures.

The oracles here are written independently of the package internals: the
display oracle builds strings by always printing two decimals and stripping,
and the tolerance oracle runs the band arithmetic in Decimal. Tests compare
package output against these, so a change to the implementation's branch
logic cannot silently re-derive its own expected values.
"""

from decimal import Decimal

import pytest

from t34sim.controller import new_controller, new_hardware
from t34sim.syringe_db import SEED_PATH, load_seed_store


def digits_oracle(cents: int) -> str:
    # always render two decimals, then strip trailing zeros and a bare point;
    # the decimal point shields the integer part's own zeros from rstrip
    whole, part = divmod(cents, 100)
    return f"{whole}.{part:02d}".rstrip("0").rstrip(".")


def tolerance_oracle(nominal: Decimal, expelled: Decimal) -> Decimal:
    half = nominal / 2
    if nominal < 5:
        if expelled >= half:
            return Decimal("0.05") * expelled
        return Decimal("0.015") * nominal + Decimal("0.02") * expelled
    if expelled >= half:
        return Decimal("0.04") * expelled
    return Decimal("0.015") * nominal + Decimal("0.01") * expelled


def closure_states(context):
    """Independent reachability oracle: a depth-first worklist closure.

    Shares only successors() and initial_abstract() with the checker under
    test; the traversal strategy, bookkeeping, and counting are its own, so
    an explored-count bug in the breadth-first search cannot hide here.
    """
    from t34sim.safety import initial_abstract, successors

    seen = set()
    todo = [initial_abstract(context)]
    while todo:
        node = todo.pop()
        if node in seen:
            continue
        seen.add(node)
        for edge in successors(context, node):
            if edge.target not in seen:
                todo.append(edge.target)
    return seen


@pytest.fixture(scope="session")
def stock_store():
    store, _ = load_seed_store(SEED_PATH)
    return store


@pytest.fixture(scope="session")
def stock_report():
    from t34sim.safety import model_check
    return model_check()


@pytest.fixture()
def boot_state():
    return new_controller(new_hardware(battery_level=99))
