# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""
subreak is a numerical laboratory for spontaneous unitarity breaking: the
thin spectrum of an ordered many-body system evolved under a non-unitary,
symmetry-breaking field.
"""
from __future__ import absolute_import, division, print_function
from .version import __version__  # noqa
from .errors import *
from .angular import *
from .thin_spectrum import *
from .abc import *
from .eigen_propagator import *
from .expm_propagator import *
from .stepped_propagator import *
from .dynamics import *
from .experiments import *
from .ensemble import *
from .oracle import *
from .simulation import *
