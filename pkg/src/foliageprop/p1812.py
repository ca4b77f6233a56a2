"""Basic transmission loss per Recommendation ITU-R P.1812-6.

Implements the Recommendation's Annex 1 procedure for terrestrial paths:
line-of-sight loss with multipath/focusing corrections, delta-Bullington
diffraction (knife-edge over the actual profile combined with spherical-earth
loss), ducting/layer-reflection, troposcatter, and the angular-distance /
path-length blending of those mechanisms. Representative clutter enters only
through the profile's clutter vector (added to terrain heights for the
diffraction analysis, zeroed endpoints); an all-zero clutter vector gives the
"no clutter" mode.

Scope restrictions relative to the full Recommendation: paths are treated as
all-inland (no radio-climatic zone vector, so the longest land/inland
distances equal the path length and coast distances take their far-inland
defaults), and the refractivity parameters are caller-supplied constants
rather than values interpolated from the digital world maps. Both are
appropriate for the over-land rural links this package targets.

Equation numbers in comments refer to ITU-R P.1812-6.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import geodesy
from .errors import (
    DistanceOutOfRange,
    FrequencyOutOfRange,
    HeightOutOfRange,
    InvalidProfile,
)
from .profile import PathProfile, strip_clutter

FREQ_MIN_MHZ = 30.0
FREQ_MAX_MHZ = 6000.0
DIST_MIN_KM = 0.25
DIST_MAX_KM = 3000.0
ANTENNA_MAX_M = 3000.0

_EARTH_RADIUS_KM = 6371.0


class Polarization(enum.Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


@dataclass(frozen=True)
class LinkParams:
    """Radio link description: frequency, antenna heights, terminal positions."""

    frequency_mhz: float
    tx_height_m: float
    rx_height_m: float
    tx_lat: float
    tx_lon: float
    rx_lat: float
    rx_lon: float
    polarization: Polarization = Polarization.VERTICAL

    def __post_init__(self):
        if not FREQ_MIN_MHZ <= self.frequency_mhz <= FREQ_MAX_MHZ:
            raise FrequencyOutOfRange(
                f"frequency {self.frequency_mhz} MHz outside [{FREQ_MIN_MHZ}, {FREQ_MAX_MHZ}] MHz"
            )
        for name, h in (("tx", self.tx_height_m), ("rx", self.rx_height_m)):
            if not 0.0 < h <= ANTENNA_MAX_M:
                raise HeightOutOfRange(
                    f"{name} antenna height {h} m outside (0, {ANTENNA_MAX_M}] m"
                )


@dataclass(frozen=True)
class ModelEnvironment:
    """Radio-meteorological settings; defaults give median (50%/50%) predictions."""

    p: float = 50.0          # time percentage
    pl: float = 50.0         # location percentage
    delta_n: float = 40.0    # refractivity lapse rate, N-units/km
    n0: float = 325.0        # sea-level surface refractivity, N-units
    omega: float = 0.0       # fraction of path over water
    sigma_loc: float = 0.0   # location variability std dev (dB); 0 keeps the median

    def __post_init__(self):
        if not 1.0 <= self.p <= 50.0:
            raise ValueError(f"time percentage p must be in [1, 50], got {self.p}")
        if not 1.0 <= self.pl <= 99.0:
            raise ValueError(f"location percentage pL must be in [1, 99], got {self.pl}")
        if not 0.0 <= self.omega <= 1.0:
            raise ValueError(f"omega must be in [0, 1], got {self.omega}")
        if self.delta_n <= 0 or self.delta_n >= 157.0:
            raise ValueError(f"delta_n must be in (0, 157), got {self.delta_n}")
        if self.sigma_loc < 0:
            raise ValueError(f"sigma_loc must be >= 0, got {self.sigma_loc}")


@dataclass(frozen=True)
class ModeLosses:
    with_clutter_db: float
    no_clutter_db: float


def path_loss_p1812(profile: PathProfile, link: LinkParams, env: ModelEnvironment) -> float:
    """Basic transmission loss (dB) not exceeded for p% time / pL% locations."""
    d = np.asarray(profile.distances_km, dtype=float)
    h = np.asarray(profile.terrain_m, dtype=float)
    R = np.asarray(profile.clutter_m, dtype=float)

    if len(d) < 5:
        raise InvalidProfile(f"profile needs more than 4 points, got {len(d)}")
    dtot = float(d[-1] - d[0])
    if not DIST_MIN_KM <= dtot <= DIST_MAX_KM:
        raise DistanceOutOfRange(
            f"path length {dtot:.3f} km outside [{DIST_MIN_KM}, {DIST_MAX_KM}] km"
        )

    f = link.frequency_mhz / 1000.0  # GHz
    p = env.p
    htg, hrg = link.tx_height_m, link.rx_height_m

    # All-inland path: longest continuous land/inland sections span the path.
    dtm = dlm = dtot
    dct = dcr = 500.0
    omega = env.omega

    phi_path = _path_centre_latitude(link)
    b0 = _beta0(phi_path, dtm, dlm)
    ae, ab = _effective_earth_radius(env.delta_n)

    geo = _smooth_earth_heights(d, h, htg, hrg, ae, f)

    hts = h[0] + htg
    hrs = h[-1] + hrg

    # Terrain plus representative clutter, endpoints excluded (Section 3.2)
    g = h + R
    g[0] = h[0]
    g[-1] = h[-1]

    # Interpolation factor for path angular distance, Eq (57)
    fj = 1.0 - 0.5 * (1.0 + math.tanh(3.0 * 0.8 * (geo.theta - 0.3) / 0.3))
    # Interpolation factor for great-circle distance, Eq (58)
    fk = 1.0 - 0.5 * (1.0 + math.tanh(3.0 * 0.5 * (dtot - 20.0) / 20.0))

    lbfs, lb0p, lb0b = _pl_los(dtot, hts, hrs, f, p, b0, geo.dlt, geo.dlr)

    ldp, ld50 = _diffraction_p(d, g, hts, hrs, geo.hstd, geo.hsrd, f, omega, p, b0, ae, ab)

    lbd50 = lbfs + ld50                    # Eq (42)
    lbd = lb0p + ldp                       # Eq (43)

    # Notional minimum loss associated with LoS and over-sea sub-path diffraction
    lminb0p = lb0p + (1.0 - omega) * ldp
    if p >= b0:
        fi = _inv_cum_norm(p / 100.0) / _inv_cum_norm(b0 / 100.0)  # Eq (40a)
        lminb0p = lbd50 + (lb0b + (1.0 - omega) * ldp - lbd50) * fi  # Eq (59)

    lba = _tl_anomalous(
        dtot, geo.dlt, geo.dlr, dct, dcr, dlm, hts, hrs, geo.hte, geo.hre,
        geo.hm, geo.theta_t, geo.theta_r, f, p, omega, ae, b0,
    )
    eta = 2.5
    lminbap = eta * math.log(math.exp(lba / eta) + math.exp(lb0p / eta))  # Eq (60)

    lbda = lbd.copy()                      # Eq (61)
    mask = lminbap <= lbd
    lbda[mask] = lminbap + (lbd[mask] - lminbap) * fk

    lbam = lbda + (lminb0p - lbda) * fj    # Eq (62)

    lbs = _tl_tropo(dtot, geo.theta, f, p, env.n0)

    lbc = -5.0 * np.log10(10.0 ** (-0.2 * lbs) + 10.0 ** (-0.2 * lbam))  # Eq (63)
    pol_index = 0 if link.polarization is Polarization.HORIZONTAL else 1
    lbc_pol = float(lbc[pol_index])

    # Location variability (Section 4.8); sigma_loc = 0 keeps the median value
    lloc = -_inv_cum_norm(env.pl / 100.0) * env.sigma_loc

    return max(lb0p, lbc_pol + lloc)       # Eq (69)


def path_loss_modes(profile: PathProfile, link: LinkParams, env: ModelEnvironment) -> ModeLosses:
    """Losses for the clutter-as-given and clutter-stripped variants of one profile."""
    return ModeLosses(
        with_clutter_db=path_loss_p1812(profile, link, env),
        no_clutter_db=path_loss_p1812(strip_clutter(profile), link, env),
    )


# --- geometry: smooth-earth surface, horizons, effective heights --------------

@dataclass(frozen=True)
class _PathGeometry:
    hstd: float
    hsrd: float
    hte: float
    hre: float
    hm: float
    dlt: float
    dlr: float
    theta_t: float
    theta_r: float
    theta: float
    is_los: bool


def _smooth_earth_heights(d, h, htg, hrg, ae, f) -> _PathGeometry:
    """Attachment 1 Sections 4 and 5: smooth surface, horizons, roughness."""
    n = len(d)
    dtot = d[-1] - d[0]
    hts = h[0] + htg
    hrs = h[-1] + hrg

    # Section 5.6.1: least-squares smooth surface through the terrain
    di, dim1 = d[1:], d[:-1]
    hi, him1 = h[1:], h[:-1]
    v1 = np.sum((di - dim1) * (hi + him1))                                     # Eq (85)
    v2 = np.sum((di - dim1) * (hi * (2.0 * di + dim1) + him1 * (di + 2.0 * dim1)))  # Eq (86)
    hst = (2.0 * v1 * dtot - v2) / dtot**2                                     # Eq (87)
    hsr = (v2 - v1 * dtot) / dtot**2                                           # Eq (88)

    # Section 5.6.2: smooth-surface heights for the diffraction model
    hh = h - (hts * (dtot - d) + hrs * d) / dtot                               # Eq (89d)
    hobs = np.max(hh[1:-1])                                                    # Eq (89a)
    alpha_obt = np.max(hh[1:-1] / d[1:-1])                                     # Eq (89b)
    alpha_obr = np.max(hh[1:-1] / (dtot - d[1:-1]))                            # Eq (89c)

    if hobs <= 0:
        hstp, hsrp = hst, hsr                                                  # Eq (90a, 90b)
    else:
        gt = alpha_obt / (alpha_obt + alpha_obr)                               # Eq (90e)
        gr = alpha_obr / (alpha_obt + alpha_obr)                               # Eq (90f)
        hstp = hst - hobs * gt                                                 # Eq (90c)
        hsrp = hsr - hobs * gr                                                 # Eq (90d)

    hstd = h[0] if hstp >= h[0] else hstp                                      # Eq (91a, 91b)
    hsrd = h[-1] if hsrp > h[-1] else hsrp                                     # Eq (91c, 91d)

    # Sections 4 and 5.1: horizon elevation angles and distances
    dint, hint = d[1:-1], h[1:-1]
    theta_i = 1000.0 * np.arctan((hint - hts) / (1000.0 * dint) - dint / (2.0 * ae))  # Eq (77)
    theta_td = 1000.0 * math.atan((hrs - hts) / (1000.0 * dtot) - dtot / (2.0 * ae))  # Eq (78)
    theta_rd = 1000.0 * math.atan((hts - hrs) / (1000.0 * dtot) - dtot / (2.0 * ae))  # Eq (81)

    theta_max = float(np.max(theta_i))
    is_los = theta_max <= theta_td
    theta_t = max(theta_max, theta_td)                                         # Eq (79)

    if not is_los:
        lt = int(np.argmax(theta_i)) + 1
        dlt = d[lt]                                                            # Eq (80)
        theta_j = 1000.0 * np.arctan(
            (hint - hrs) / (1000.0 * (dtot - dint)) - (dtot - dint) / (2.0 * ae)
        )                                                                      # Eq (82a)
        theta_r = float(np.max(theta_j))
        lr = int(len(theta_j) - 1 - np.argmax(theta_j[::-1])) + 1
        dlr = dtot - d[lr]                                                     # Eq (83)
    else:
        theta_r = theta_rd
        # For LoS paths the notional horizon is the principal knife edge
        lam = 0.2998 / f
        ce = 1.0 / ae
        nu = (
            hint + 500.0 * ce * dint * (dtot - dint)
            - (hts * (dtot - dint) + hrs * dint) / dtot
        ) * np.sqrt(0.002 * dtot / (lam * dint * (dtot - dint)))               # Eq (81a)
        lt = int(len(nu) - 1 - np.argmax(nu[::-1])) + 1
        dlt = d[lt]                                                            # Eq (80)
        dlr = dtot - dlt                                                       # Eq (83a)
        lr = lt

    theta = 1000.0 * dtot / ae + theta_t + theta_r                             # Eq (84)

    # Section 5.6.3: terminal heights and roughness for the ducting model
    hst = min(hst, h[0])                                                       # Eq (92a)
    hsr = min(hsr, h[-1])                                                      # Eq (92b)
    m = (hsr - hst) / dtot                                                     # Eq (93)
    hte = htg + h[0] - hst                                                     # Eq (94a)
    hre = hrg + h[-1] - hsr                                                    # Eq (94b)
    sl = slice(lt, lr + 1)
    hm = float(np.max(h[sl] - (hst + m * d[sl])))                              # Eq (95)

    return _PathGeometry(
        hstd=hstd, hsrd=hsrd, hte=hte, hre=hre, hm=hm,
        dlt=dlt, dlr=dlr, theta_t=theta_t, theta_r=theta_r, theta=theta,
        is_los=is_los,
    )


# --- propagation mechanisms ----------------------------------------------------

def _pl_los(dtot, hts, hrs, f, p, b0, dlt, dlr):
    """Section 4.2: free-space loss plus multipath/focusing corrections."""
    dfs2 = dtot**2 + ((hts - hrs) / 1000.0) ** 2                               # Eq (8a)
    lbfs = 92.4 + 20.0 * math.log10(f) + 10.0 * math.log10(dfs2)              # Eq (8)
    esp = 2.6 * (1.0 - math.exp(-0.1 * (dlt + dlr))) * math.log10(p / 50.0)   # Eq (9a)
    esb = 2.6 * (1.0 - math.exp(-0.1 * (dlt + dlr))) * math.log10(b0 / 50.0)  # Eq (9b)
    return lbfs, lbfs + esp, lbfs + esb                                        # Eq (10, 11)


def _knife_edge(nu):
    """Single knife-edge loss J(nu), Eq (12)."""
    if nu > -0.78:
        return 6.9 + 20.0 * math.log10(math.sqrt((nu - 0.1) ** 2 + 1.0) + nu - 0.1)
    return 0.0


def _bullington(d, g, hts, hrs, ap, f):
    """Section 4.3.1: Bullington diffraction loss over a general profile."""
    ce = 1.0 / ap
    lam = 0.2998 / f
    dtot = d[-1] - d[0]
    di = d[1:-1]
    gi = g[1:-1]

    stim = np.max((gi + 500.0 * ce * di * (dtot - di) - hts) / di)             # Eq (13)
    str_ = (hrs - hts) / dtot                                                  # Eq (14)

    if stim < str_:  # LoS path
        numax = np.max(
            (gi + 500.0 * ce * di * (dtot - di) - (hts * (dtot - di) + hrs * di) / dtot)
            * np.sqrt(0.002 * dtot / (lam * di * (dtot - di)))
        )                                                                      # Eq (15)
        luc = _knife_edge(numax)                                               # Eq (16)
    else:  # transhorizon
        srim = np.max((gi + 500.0 * ce * di * (dtot - di) - hrs) / (dtot - di))  # Eq (17)
        dbp = (hrs - hts + srim * dtot) / (stim + srim)                        # Eq (18)
        nub = (
            hts + stim * dbp - (hts * (dtot - dbp) + hrs * dbp) / dtot
        ) * math.sqrt(0.002 * dtot / (lam * dbp * (dtot - dbp)))               # Eq (19)
        luc = _knife_edge(nub)                                                 # Eq (20)

    return luc + (1.0 - math.exp(-luc / 6.0)) * (10.0 + 0.02 * dtot)           # Eq (21)


def _first_term_inner(epsr, sigma, dtot, hte, hre, adft, f):
    """Section 4.3.3 inner computation for one ground type, both polarizations."""
    # Normalized surface admittance, horizontal then vertical, Eq (29a, 29b)
    k_h = 0.036 * (adft * f) ** (-1.0 / 3.0) * ((epsr - 1.0) ** 2 + (18.0 * sigma / f) ** 2) ** (-0.25)
    k_v = k_h * (epsr**2 + (18.0 * sigma / f) ** 2) ** 0.5
    K = np.array([k_h, k_v])

    beta = (1.0 + 1.6 * K**2 + 0.67 * K**4) / (1.0 + 4.5 * K**2 + 1.53 * K**4)  # Eq (30)
    X = 21.88 * beta * (f / adft**2) ** (1.0 / 3.0) * dtot                       # Eq (31)
    Yt = 0.9575 * beta * (f**2 / adft) ** (1.0 / 3.0) * hte                      # Eq (32a)
    Yr = 0.9575 * beta * (f**2 / adft) ** (1.0 / 3.0) * hre                      # Eq (32b)

    Fx = np.where(
        X >= 1.6,
        11.0 + 10.0 * np.log10(X) - 17.6 * X,
        -20.0 * np.log10(X) - 5.6488 * X**1.425,
    )                                                                            # Eq (33)

    def g_of(B):
        return np.where(
            B > 2.0,
            17.6 * np.sqrt(np.maximum(B - 1.1, 0.0)) - 5.0 * np.log10(np.maximum(B - 1.1, 1e-300)) - 8.0,
            20.0 * np.log10(np.maximum(B + 0.1 * B**3, 1e-300)),
        )                                                                        # Eq (34)

    GYt = np.maximum(g_of(beta * Yt), 2.0 + 20.0 * np.log10(K))                  # Eq (35)
    GYr = np.maximum(g_of(beta * Yr), 2.0 + 20.0 * np.log10(K))

    return -Fx - GYt - GYr                                                       # Eq (36)


def _first_term_se(dtot, hte, hre, adft, f, omega):
    """Section 4.3.3: first-term spherical-earth loss, land/sea mixed."""
    ldft_land = _first_term_inner(22.0, 0.003, dtot, hte, hre, adft, f)
    ldft_sea = _first_term_inner(80.0, 5.0, dtot, hte, hre, adft, f)
    return omega * ldft_sea + (1.0 - omega) * ldft_land                          # Eq (28)


def _spherical_earth(dtot, hte, hre, ap, f, omega):
    """Section 4.3.2: spherical-earth diffraction loss, both polarizations."""
    lam = 0.2998 / f
    dlos = math.sqrt(2.0 * ap) * (math.sqrt(0.001 * hte) + math.sqrt(0.001 * hre))  # Eq (22)
    if dtot >= dlos:
        return _first_term_se(dtot, hte, hre, ap, f, omega)

    c = (hte - hre) / (hte + hre)                                                # Eq (24d)
    m = 250.0 * dtot**2 / (ap * (hte + hre))                                     # Eq (24e)
    b = 2.0 * math.sqrt((m + 1.0) / (3.0 * m)) * math.cos(
        math.pi / 3.0 + math.acos(1.5 * c * math.sqrt(3.0 * m / (m + 1.0) ** 3)) / 3.0
    )                                                                            # Eq (24c)
    dse1 = dtot / 2.0 * (1.0 + b)                                                # Eq (24a)
    dse2 = dtot - dse1                                                           # Eq (24b)
    hse = (
        (hte - 500.0 * dse1**2 / ap) * dse2 + (hre - 500.0 * dse2**2 / ap) * dse1
    ) / dtot                                                                     # Eq (23)
    hreq = 17.456 * math.sqrt(dse1 * dse2 * lam / dtot)                          # Eq (25)
    if hse > hreq:
        return np.zeros(2)

    aem = 500.0 * (dtot / (math.sqrt(hte) + math.sqrt(hre))) ** 2                # Eq (26)
    ldft = np.maximum(_first_term_se(dtot, hte, hre, aem, f, omega), 0.0)
    return (1.0 - hse / hreq) * ldft                                             # Eq (27)


def _delta_bullington(d, g, hts, hrs, hstd, hsrd, ap, f, omega):
    """Section 4.3.4: complete delta-Bullington diffraction loss."""
    lbulla = _bullington(d, g, hts, hrs, ap, f)

    hts1 = hts - hstd                                                            # Eq (37a)
    hrs1 = hrs - hsrd                                                            # Eq (37b)
    smooth = np.zeros_like(g)
    lbulls = _bullington(d, smooth, hts1, hrs1, ap, f)

    ldsph = _spherical_earth(d[-1] - d[0], hts1, hrs1, ap, f, omega)             # Eq (38)
    return lbulla + np.maximum(ldsph - lbulls, 0.0)                              # Eq (39)


def _diffraction_p(d, g, hts, hrs, hstd, hsrd, f, omega, p, b0, ae, ab):
    """Sections 4.3.4-4.3.5: diffraction loss at 50% time and at p% time."""
    ld50 = _delta_bullington(d, g, hts, hrs, hstd, hsrd, ae, f, omega)
    if p == 50.0:
        return ld50, ld50
    ldb = _delta_bullington(d, g, hts, hrs, hstd, hsrd, ab, f, omega)
    fi = 1.0
    if p > b0:
        fi = _inv_cum_norm(p / 100.0) / _inv_cum_norm(b0 / 100.0)                # Eq (40a)
    return ld50 + fi * (ldb - ld50), ld50                                        # Eq (41)


def _tl_anomalous(dtot, dlt, dlr, dct, dcr, dlm, hts, hrs, hte, hre, hm,
                  theta_t, theta_r, f, p, omega, ae, b0):
    """Section 4.5: ducting / layer-reflection loss."""
    alf = 45.375 - 137.0 * f + 92.5 * f**2 if f < 0.5 else 0.0                   # Eq (47a)

    theta_t2 = theta_t - 0.1 * dlt                                               # Eq (48a)
    theta_r2 = theta_r - 0.1 * dlr
    ast = asr = 0.0
    if theta_t2 > 0:
        ast = 20.0 * math.log10(1.0 + 0.361 * theta_t2 * math.sqrt(f * dlt)) + 0.264 * theta_t2 * f ** (1.0 / 3.0)
    if theta_r2 > 0:
        asr = 20.0 * math.log10(1.0 + 0.361 * theta_r2 * math.sqrt(f * dlr)) + 0.264 * theta_r2 * f ** (1.0 / 3.0)

    act = acr = 0.0                                                              # Eq (49)
    if omega >= 0.75:
        if dct <= min(dlt, 5.0):
            act = -3.0 * math.exp(-0.25 * dct**2) * (1.0 + math.tanh(0.07 * (50.0 - hts)))
        if dcr <= min(dlr, 5.0):
            acr = -3.0 * math.exp(-0.25 * dcr**2) * (1.0 + math.tanh(0.07 * (50.0 - hrs)))

    gamma_d = 5e-5 * ae * f ** (1.0 / 3.0)                                       # Eq (51)

    theta_t1 = min(theta_t, 0.1 * dlt)                                           # Eq (52a)
    theta_r1 = min(theta_r, 0.1 * dlr)
    theta1 = 1e3 * dtot / ae + theta_t1 + theta_r1                               # Eq (52)

    di = min(dtot - dlt - dlr, 40.0)                                             # Eq (56a)
    mu3 = 1.0
    if hm > 10.0:
        mu3 = math.exp(-4.6e-5 * (hm - 10.0) * (43.0 + 6.0 * di))                # Eq (56)

    tau = 1.0 - math.exp(-4.12e-4 * dlm**2.41)                                   # Eq (3)
    alpha = max(-0.6 - 3.5e-9 * dtot**3.1 * tau, -3.4)                           # Eq (55a)
    mu2 = min(
        (500.0 / ae * dtot**2 / (math.sqrt(hte) + math.sqrt(hre)) ** 2) ** alpha, 1.0
    )                                                                            # Eq (55)
    beta = b0 * mu2 * mu3                                                        # Eq (54)

    log_beta = math.log10(beta)
    gamma = (
        1.076 / (2.0058 - log_beta) ** 1.012
        * math.exp(-(9.51 - 4.8 * log_beta + 0.198 * log_beta**2) * 1e-6 * dtot**1.13)
    )                                                                            # Eq (53a)
    ap_ = -12.0 + (1.2 + 3.7e-3 * dtot) * math.log10(p / beta) + 12.0 * (p / beta) ** gamma  # Eq (53)

    adp = gamma_d * theta1 + ap_                                                 # Eq (50)
    af = 102.45 + 20.0 * math.log10(f) + 20.0 * math.log10(dlt + dlr) + alf + ast + asr + act + acr  # Eq (47)
    return af + adp                                                              # Eq (46)


def _tl_tropo(dtot, theta, f, p, n0):
    """Section 4.4: troposcatter loss not exceeded for p% time."""
    lf = 25.0 * math.log10(f) - 2.5 * math.log10(f / 2.0) ** 2                   # Eq (45)
    return (
        190.1 + lf + 20.0 * math.log10(dtot) + 0.573 * theta
        - 0.15 * n0 - 10.125 * math.log10(50.0 / p) ** 0.7
    )                                                                            # Eq (44)


# --- shared small pieces --------------------------------------------------------

def _effective_earth_radius(delta_n):
    k50 = 157.0 / (157.0 - delta_n)                                              # Eq (6)
    return _EARTH_RADIUS_KM * k50, _EARTH_RADIUS_KM * 3.0                        # Eq (7a, 7b)


def _beta0(phi_path, dtm, dlm):
    """Time percentage of super-refractive gradients, Eqs (2)-(5)."""
    tau = 1.0 - math.exp(-4.12e-4 * dlm**2.41)                                   # Eq (3)
    mu1 = min(
        (10.0 ** (-dtm / (16.0 - 6.6 * tau)) + 10.0 ** (-5.0 * (0.496 + 0.354 * tau))) ** 0.2,
        1.0,
    )                                                                            # Eq (2)
    abs_phi = abs(phi_path)
    if abs_phi <= 70.0:
        mu4 = mu1 ** (-0.935 + 0.0176 * abs_phi)                                 # Eq (4)
        return 10.0 ** (-0.015 * abs_phi + 1.67) * mu1 * mu4                     # Eq (5)
    mu4 = mu1**0.3
    return 4.17 * mu1 * mu4


def _inv_cum_norm(x):
    """Attachment 2: approximation to the inverse cumulative normal."""
    x = min(max(x, 1e-6), 1.0 - 1e-6)

    def t_of(y):
        return math.sqrt(-2.0 * math.log(y))                                     # Eq (97a)

    def xi_of(y):
        t = t_of(y)
        c0, c1, c2 = 2.515516698, 0.802853, 0.010328
        d1, d2, d3 = 1.432788, 0.189269, 0.001308
        return ((c2 * t + c1) * t + c0) / (((d3 * t + d2) * t + d1) * t + 1.0)   # Eq (97b)

    if x <= 0.5:
        return t_of(x) - xi_of(x)                                                # Eq (96a)
    return -(t_of(1.0 - x) - xi_of(1.0 - x))                                     # Eq (96b)


def _path_centre_latitude(link: LinkParams) -> float:
    dist_m, azimuth, _ = geodesy.inverse(link.tx_lat, link.tx_lon, link.rx_lat, link.rx_lon)
    if dist_m == 0.0:
        return link.tx_lat
    lat, _ = geodesy.direct(link.tx_lat, link.tx_lon, azimuth, dist_m / 2.0)
    return float(lat)
