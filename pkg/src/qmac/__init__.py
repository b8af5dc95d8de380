"""Hybrid quantum-classical multiply-accumulate circuits.

Gate-level builder, two independent simulators (dense statevector oracle
and exact integer phase accumulators), depth/size cost model, HTTP service
and a thin-client CLI.
"""

__version__ = "0.1.0"

from .builder import MacInput, QmacParams, build_chain  # noqa: E402,F401
