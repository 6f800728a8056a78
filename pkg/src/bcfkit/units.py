"""Unit conventions.

Frequencies are in cm^-1 throughout. Temperatures enter in Kelvin and are
converted to cm^-1 with the Boltzmann constant below. Times are kept in the
variable conjugate to cm^-1 (the phase of a mode is ``omega * t``); multiply
by ``FS_PER_INVCM`` to obtain femtoseconds.
"""

KB_INVCM_PER_K = 0.6950348

# 1 / (2 pi c) with c in cm/fs
FS_PER_INVCM = 5308.8375


def kelvin_to_invcm(temperature):
    return KB_INVCM_PER_K * temperature


def time_to_fs(t):
    return t * FS_PER_INVCM


def fs_to_time(t_fs):
    return t_fs / FS_PER_INVCM
