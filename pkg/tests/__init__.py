# Licensed under a 3-clause BSD style license - see LICENSE
"""
This subpackage contains the unit and integration tests for subreak.
"""
