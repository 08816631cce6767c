"""Shared model fixtures.

Two reference configurations are used throughout the suite:

* ``model_a`` -- capillary hysteresis only (both branches share the same
  quadratic relative permeabilities), van Genuchten curves with
  (Lambda_i, m_i) = (3.5, 0.92) and (Lambda_d, m_d) = (7, 0.9),
  unit mobility ratio and unit gravity number.
* ``model_b`` -- full hysteresis via the ``corey_3_2`` fractional-flow
  preset (drainage branch more mobile than imbibition), no gravity.
"""

import pytest

from hystflow.constitutive import (
    CapillaryModel,
    ConstitutiveModel,
    PermeabilityModel,
    VanGenuchtenCurve,
)

VG_I = dict(Lambda=3.5, m=0.92)
VG_D = dict(Lambda=7.0, m=0.9)


def make_capillary(tau=1.0):
    return CapillaryModel(
        imbibition=VanGenuchtenCurve(**VG_I),
        drainage=VanGenuchtenCurve(**VG_D),
        tau=tau,
    )


def make_model_a(tau=1.0, M=1.0, N_g=1.0):
    perm = PermeabilityModel.brooks_corey(q_i=2.0, q_d=2.0, hysteretic=False)
    return ConstitutiveModel(
        capillary=make_capillary(tau), permeability=perm, M=M, N_g=N_g
    )


def make_model_b(tau=0.5, preset="corey_3_2"):
    perm = PermeabilityModel.from_preset(preset)
    return ConstitutiveModel(
        capillary=make_capillary(tau), permeability=perm, M=1.0, N_g=0.0
    )


@pytest.fixture
def model_a():
    return make_model_a()


@pytest.fixture
def model_b():
    return make_model_b()
