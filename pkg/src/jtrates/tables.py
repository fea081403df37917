"""Reference bond-price tables for the four model kinds.

Each table fixes Q-measure parameters, an initial rate of 5% and four
maturities (one month to one year).  ``numerical`` holds the reference ODE
(Merton kinds) or finite-difference (Dothan kinds) prices and ``expectation``
the reference expectation-hypothesis prices, indexed ``[maturity][regime]``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .measure import MeasureParams
from .models import ModelSpec

MATURITIES = (1 / 12, 1 / 4, 1 / 2, 1.0)
MATURITY_LABELS = ("1 month", "1 quarter", "1 semester", "1 year")
INITIAL_RATE = 0.05

EXPECTATION_TOL = 5e-6
ODE_TOL = 1e-5
FD_TOL = 2e-4


@dataclass(frozen=True)
class ReferenceTable:
    number: int
    title: str
    model: ModelSpec
    numerical_method: str
    numerical: tuple[tuple[float, float], ...]
    expectation: tuple[tuple[float, float], ...]

    @property
    def numerical_tol(self) -> float:
        return ODE_TOL if self.numerical_method == "ode" else FD_TOL


_MERTON = dict(mu=(-0.02, 0.05), eta=(0.01, -0.02), lam=(1.0, 2.0))
_DOTHAN = dict(mu=(-0.1, 0.25), eta=(0.1, -0.2), lam=(1.0, 2.0))

TABLES: dict[int, ReferenceTable] = {
    1: ReferenceTable(
        1,
        "Jump-telegraph Merton model",
        ModelSpec("jt_merton", **_MERTON),
        "ode",
        ((0.995875, 0.995811), (0.987844, 0.987358), (0.976244, 0.974689), (0.954317, 0.950064)),
        ((0.995875, 0.995811), (0.987843, 0.987355), (0.976239, 0.974672), (0.954264, 0.949927)),
    ),
    2: ReferenceTable(
        2,
        "Jump-telegraph Dothan model",
        ModelSpec("jt_dothan", **_DOTHAN),
        "fd",
        ((0.995842, 0.995869), (0.987594, 0.987786), (0.975430, 0.976039), (0.951962, 0.953645)),
        ((0.995843, 0.995867), (0.987596, 0.987781), (0.975431, 0.976029), (0.951955, 0.953615)),
    ),
    3: ReferenceTable(
        3,
        "Jump-telegraph-diffusion Merton model",
        ModelSpec(
            "jtd_merton", **_MERTON, sigma=(0.02, 0.06), measure_params=MeasureParams(psi0=0.5, psi1=1.0)
        ),
        "ode",
        ((0.995836, 0.995613), (0.987429, 0.985732), (0.974318, 0.968920), (0.945471, 0.930939)),
        ((0.995836, 0.995613), (0.987427, 0.985721), (0.974294, 0.968830), (0.945206, 0.930256)),
    ),
    4: ReferenceTable(
        4,
        "Jump-telegraph-diffusion Dothan model",
        ModelSpec(
            "jtd_dothan", **_DOTHAN, sigma=(0.4, 0.4), measure_params=MeasureParams(psi0=1.0, psi1=1.0)
        ),
        "fd",
        ((0.995774, 0.995798), (0.986965, 0.987161), (0.972865, 0.973544), (0.941475, 0.943588)),
        ((0.995773, 0.995797), (0.986959, 0.987156), (0.972844, 0.973522), (0.941334, 0.943434)),
    ),
}
