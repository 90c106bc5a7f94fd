"""Built-in model fixtures.

``paper-case-study`` is the 2x2x2 rehabilitation example with two actions
per agent, transcribed to 8 decimal digits. Tensor index orders follow
:class:`camdp.model.FactoredCamdp`.
"""

import numpy as np

from .model import FactoredCamdp

_P0 = [
    [[0.72896067, 0.27103933], [0.95167994, 0.04832006]],
    [[0.15320242, 0.84679758], [0.55851098, 0.44148902]],
]
_PS = [
    [
        [[0.66489771, 0.33510229], [0.51544335, 0.48455665]],
        [[0.07046136, 0.92953864], [0.52137167, 0.47862833]],
    ],
    [
        [[0.56727427, 0.43272573], [0.11531405, 0.88468595]],
        [[0.65019582, 0.34980418], [0.41909603, 0.58090397]],
    ],
]
_P1 = [
    [[0.35013916, 0.64986084], [0.37319646, 0.62680354]],
    [[0.47227529, 0.52772471], [0.39457278, 0.60542722]],
]
_R0 = [
    [[0.25561406, 0.67130943], [0.59900591, 0.71733215]],
    [[0.93734953, 0.35180977], [0.25363410, 0.40247251]],
]
_RS = [
    [
        [[0.39837292, 0.77088097], [0.76475098, 0.28385938]],
        [[0.18954219, 0.47125096], [0.33480604, 0.73473504]],
    ],
    [
        [[0.18910712, 0.33110407], [0.84422842, 0.61502403]],
        [[0.88526408, 0.97655302], [0.83690859, 0.18082463]],
    ],
]
_R1 = [
    [[0.74651072, 0.72407057], [0.40610780, 0.98937985]],
    [[0.45049928, 0.37380843], [0.70962861, 0.08245855]],
]

#: Starting joint policy of the case-study run.
CASE_STUDY_INITIAL = ([0, 0, 0, 0], [1, 0, 0, 0])

#: Discount factor at which the case-study values 9.99 / 9.81 / 9.05 reproduce
#: (max aggregator). At 0.9 the same model has values near 2.0.
CASE_STUDY_GAMMA = 0.98


def case_study_model():
    return FactoredCamdp.from_arrays(_P0, _PS, _P1, _R0, _RS, _R1)


FIXTURES = {"paper-case-study": case_study_model}


def load_fixture(name):
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; available: {sorted(FIXTURES)}") from None
