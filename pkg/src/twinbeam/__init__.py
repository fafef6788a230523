"""Design and noise simulator for a laser-pumped twin-beam OPO.

Modules follow the optical chain: ``beam_optics`` (ABCD cavity modes),
``laser_model`` (green pump source), ``opo_quantum`` (loss budget and
squeezing spectra), ``lock_servo`` (PDH lock), ``noise_bench``
(Monte-Carlo balanced detection) and ``cli`` (scenario driven front end).
"""

__version__ = "0.1.0"
