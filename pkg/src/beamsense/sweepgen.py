"""Synthetic beam-sweep scene simulator.

Two co-located uniform linear arrays (one transmit, one receive) sweep
their codebooks while a small set of body scatterers reflects power back.
Each frame is the 50x56 grid of received power in dB for one full sweep.
Eight gesture families (4 static poses, 4 periodic movements) stand in for
the human-subject recordings, with per-subject geometry jitter.
"""

import math
from dataclasses import dataclass, field

import numpy as np

N_TX_BEAMS = 50
N_RX_BEAMS = 56
N_GESTURES = 8


@dataclass
class ArrayConfig:
    n_tx_beams: int = N_TX_BEAMS
    n_rx_beams: int = N_RX_BEAMS
    elements_per_array: int = 16
    carrier_wavelength: float = 0.005          # meters (60 GHz)
    beam_span_deg: float = 60.0                # codebook spans [-span, +span]

    def __post_init__(self):
        self.tx_angles = np.linspace(-self.beam_span_deg, self.beam_span_deg,
                                     self.n_tx_beams)
        self.rx_angles = np.linspace(-self.beam_span_deg, self.beam_span_deg,
                                     self.n_rx_beams)
        if not (np.all(np.diff(self.tx_angles) > 0)
                and np.all(np.diff(self.rx_angles) > 0)):
            raise ValueError("codebook angles must be strictly increasing")


@dataclass
class SweepTiming:
    dwell_per_pair: float = 2.319e-6
    pairs_per_sweep: int = 2800
    sweeps_per_second: float = 154.0
    symbols_per_dwell: int = 2

    def __post_init__(self):
        sweep = self.dwell_per_pair * self.pairs_per_sweep
        nominal = 1.0 / self.sweeps_per_second
        if abs(sweep - nominal) / nominal > 1e-3:
            raise ValueError(
                f"sweep duration {sweep:.6e}s disagrees with "
                f"1/{self.sweeps_per_second} = {nominal:.6e}s by more than 0.1%")


def _array_factor(config, steer_deg, direction_deg):
    """Normalized power pattern of a half-wavelength ULA steered to
    steer_deg, evaluated at direction_deg. Broadcasting over both."""
    e = config.elements_per_array
    steer = np.deg2rad(np.asarray(steer_deg, dtype=np.float64))
    direction = np.deg2rad(np.asarray(direction_deg, dtype=np.float64))
    # half-wavelength spacing -> per-element phase step pi*(sin th - sin th0)
    psi = np.pi * (np.sin(direction) - np.sin(steer))
    k = np.arange(e)
    phases = np.exp(1j * psi[..., None] * k)
    return np.abs(phases.sum(axis=-1)) ** 2 / e ** 2


def beam_gain(config, beam_index, direction_deg, side="tx"):
    """Linear power gain of one codebook beam toward a given direction."""
    angles = config.tx_angles if side == "tx" else config.rx_angles
    if not 0 <= beam_index < len(angles):
        raise ValueError(f"beam index {beam_index} outside codebook")
    return _array_factor(config, angles[beam_index], direction_deg)


def gain_matrix(config, directions_deg, side="tx"):
    """(n_beams, ...) gains of the whole codebook toward each direction."""
    angles = config.tx_angles if side == "tx" else config.rx_angles
    d = np.asarray(directions_deg, dtype=np.float64)
    return _array_factor(config, angles.reshape((-1,) + (1,) * d.ndim), d)


# --- gesture scenes -------------------------------------------------------
# Scatterers are (angle_deg, range_m, reflectivity) rows. The four static
# poses are distinct constellations; the four dynamic ones are periodic.
# Everything stays within ~±25 degrees of boresight (a person in front of
# the desk setup).

_STATIC = {
    0: [(-8.0, 2.0, 1.0), (0.0, 1.9, 1.6), (8.0, 2.0, 1.0)],
    1: [(-22.0, 2.1, 1.2), (-14.0, 2.0, 1.4), (-6.0, 2.0, 0.9)],
    2: [(6.0, 2.0, 0.9), (14.0, 2.0, 1.4), (22.0, 2.1, 1.2)],
    3: [(-24.0, 1.8, 1.0), (0.0, 2.0, 1.2), (24.0, 1.8, 1.0)],
}

GESTURE_PERIODS = {4: 1.0, 5: 1.5, 6: 2.0, 7: 1.25}


def gesture_trajectory(gesture_id, phase):
    """Scatterer rows (angle_deg, range_m, reflectivity) at a phase in [0,1)."""
    if not 0 <= gesture_id < N_GESTURES:
        raise ValueError(f"gesture_id must be in 0..7, got {gesture_id}")
    if gesture_id in _STATIC:
        return np.array(_STATIC[gesture_id])
    w = 2 * np.pi * phase
    if gesture_id == 4:          # one arm waving
        return np.array([
            (0.0, 2.0, 1.5),
            (14.0 + 8.0 * np.sin(w), 1.9, 1.0),
        ])
    if gesture_id == 5:          # both arms, mirrored
        swing = 14.0 + 8.0 * np.sin(w)
        return np.array([
            (0.0, 2.0, 1.5),
            (swing, 1.9, 1.0),
            (-swing, 1.9, 1.0),
        ])
    if gesture_id == 6:          # torso swaying in range
        return np.array([
            (0.0, 2.0 + 0.35 * np.sin(w), 1.5),
            (-6.0, 2.1, 0.8),
            (6.0, 2.1, 0.8),
        ])
    # 7: circular arm motion
    return np.array([
        (4.0, 2.1, 1.3),
        (10.0 * np.sin(w), 2.0 + 0.3 * np.cos(w), 1.2),
    ])


def gesture_kind(gesture_id):
    return "static" if gesture_id in _STATIC else "dynamic"


@dataclass
class SubjectJitter:
    """Body-size analogue: per-subject perturbation of scene geometry."""
    angle_offset_deg: float = 0.0
    range_scale: float = 1.0
    reflectivity_scale: float = 1.0

    @classmethod
    def draw(cls, rng):
        return cls(
            angle_offset_deg=float(rng.normal(0.0, 2.0)),
            range_scale=float(np.exp(rng.normal(0.0, 0.05))),
            reflectivity_scale=float(np.exp(rng.normal(0.0, 0.1))),
        )

    def apply(self, scatterers):
        out = np.array(scatterers, dtype=np.float64)
        out[..., 0] += self.angle_offset_deg
        out[..., 1] *= self.range_scale
        out[..., 2] *= self.reflectivity_scale
        return out


NOISE_FLOOR = 1e-8


def render_frame(scatterers, config, timing, noise_std_db, rng):
    """One 50x56 dB power frame from a scatterer set.

    power(tx,rx) = 10 log10( sum_s refl * g_tx * g_rx / range^4 + floor )
    plus white Gaussian noise in dB.
    """
    sc = np.asarray(scatterers, dtype=np.float64)
    if np.any(sc[:, 1] <= 0):
        raise ValueError("scatterer range must be positive")
    gtx = gain_matrix(config, sc[:, 0], side="tx")     # (50, S)
    grx = gain_matrix(config, sc[:, 0], side="rx")     # (56, S)
    w = sc[:, 2] / sc[:, 1] ** 4
    lin = np.einsum("ts,rs,s->tr", gtx, grx, w) + NOISE_FLOOR
    power = 10.0 * np.log10(lin)
    if noise_std_db > 0:
        power = power + rng.normal(0.0, noise_std_db, power.shape)
    return power


def _render_run(gesture_id, n_frames, config, timing, noise_std_db, jitter, rng):
    """Vectorized rendering of one gesture held for n_frames sweeps."""
    period = GESTURE_PERIODS.get(gesture_id)
    times = np.arange(n_frames) / timing.sweeps_per_second
    phases = np.zeros(n_frames) if period is None else (times / period) % 1.0
    if gesture_kind(gesture_id) == "static":
        sc = jitter.apply(gesture_trajectory(gesture_id, 0.0))
        scat = np.broadcast_to(sc, (n_frames,) + sc.shape)
    else:
        scat = np.stack([jitter.apply(gesture_trajectory(gesture_id, p))
                         for p in phases])
    angles = scat[..., 0]                       # (T, S)
    gtx = gain_matrix(config, angles, side="tx")    # (50, T, S)
    grx = gain_matrix(config, angles, side="rx")    # (56, T, S)
    w = scat[..., 2] / scat[..., 1] ** 4            # (T, S)
    lin = np.einsum("bts,rts,ts->tbr", gtx, grx, w) + NOISE_FLOOR
    power = 10.0 * np.log10(lin)
    if noise_std_db > 0:
        power = power + rng.normal(0.0, noise_std_db, power.shape)
    return power


@dataclass
class SessionRecord:
    subject: int
    sequence: int
    gesture: int
    start: int        # first frame index (inclusive)
    stop: int         # last frame index (exclusive)


@dataclass
class Session:
    frames: np.ndarray            # (n_frames, 50, 56) float32 dB power
    records: list
    noise_std_db: float = 1.0
    seed: int = 0


def generate_session(n_subjects=7, n_sequences=7, seconds_per_gesture=10.0,
                     config=None, timing=None, noise_std_db=1.0, seed=0):
    """Full synthetic measurement campaign.

    Per subject, per sequence: all 8 gestures in order, each held for
    seconds_per_gesture at the sweep rate. Deterministic given the seed;
    every gesture run draws from its own counter-seeded substream.
    """
    if min(n_subjects, n_sequences) < 1 or seconds_per_gesture <= 0:
        raise ValueError("all session counts must be >= 1")
    config = config or ArrayConfig()
    timing = timing or SweepTiming()
    frames_per_run = int(round(seconds_per_gesture * timing.sweeps_per_second))
    total = n_subjects * n_sequences * N_GESTURES * frames_per_run
    frames = np.empty((total, config.n_tx_beams, config.n_rx_beams),
                      dtype=np.float32)
    records = []
    pos = 0
    for subj in range(n_subjects):
        jitter = SubjectJitter.draw(np.random.default_rng([seed, subj]))
        for seq in range(n_sequences):
            for g in range(N_GESTURES):
                rng = np.random.default_rng([seed, subj, seq, g])
                run = _render_run(g, frames_per_run, config, timing,
                                  noise_std_db, jitter, rng)
                frames[pos:pos + frames_per_run] = run.astype(np.float32)
                records.append(SessionRecord(subj, seq, g, pos,
                                             pos + frames_per_run))
                pos += frames_per_run
    return Session(frames=frames, records=records,
                   noise_std_db=noise_std_db, seed=seed)


def desk_scale_session(seed=0, noise_std_db=1.0, seconds_per_gesture=10.0):
    """Reduced 2-subject, 2-sequence session used for tests and quick runs."""
    return generate_session(n_subjects=2, n_sequences=2,
                            seconds_per_gesture=seconds_per_gesture,
                            noise_std_db=noise_std_db, seed=seed)
