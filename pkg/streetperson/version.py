# Copyright (C) 2026, streetperson contributors (see `doc/contributors.txt`)
# See the file LICENSE for licensing terms.

"""
Provide version information about streetperson and the runtime environment.
"""

import sys


# streetperson version number; keep in sync with `VERSION`
__version__ = "1.0.0"

_streetperson_version = __version__
_python_version = sys.version.split()[0]
_python_platform = sys.platform


version_info = "streetperson {0}, Python {1} ({2})".format(
                 _streetperson_version, _python_version, _python_platform)
