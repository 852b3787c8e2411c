"""Inner stepping loop shared by the numba and pure-python engines.

The functions here are written as plain scalar loops so that numba can
compile them unchanged; the uncompiled originals double as the fallback
engine and as the reference for unit tests. All arithmetic is written in
one canonical form (identical expressions and evaluation order to the
vectorized operators in evolve.py) so both paths produce bit-identical
trajectories.

Return codes: 0 block exhausted, 1 tip curvature ceiling, 2 neck reached the
minimum radius, 3 time budget (T - t floor), 4 overlap exhausted, 5 tip patch
below minimum size, 6 outer patch below minimum size, 7 non-positive radius
in the bulk (reported as a resolved neck).
"""

from __future__ import annotations

CODE_NONE = 0
CODE_TIP_BLOWUP = 1
CODE_NECK = 2
CODE_TIME = 3
CODE_OVERLAP = 4
CODE_TIP_LOST = 5
CODE_OUTER_LOST = 6
CODE_NONPOSITIVE = 7


def find_bracket_outer(rout, start, out_live, r_target, hint):
    """Interior pair (live index j) of the outer grid with r_target between
    rout[start+j] and rout[start+j+1]; nearest match to the hint, or -1."""
    lo = 1
    hi = out_live - 3
    if hi < lo:
        return -1
    h = hint
    if h < lo:
        h = lo
    if h > hi:
        h = hi
    span = hi - lo + 1
    for off in range(span + 1):
        j = h + off
        if j <= hi:
            a = start + j
            if (rout[a] - r_target) * (rout[a + 1] - r_target) <= 0.0:
                return j
        j = h - off - 1
        if j >= lo:
            a = start + j
            if (rout[a] - r_target) * (rout[a + 1] - r_target) <= 0.0:
                return j
    return -1


def find_bracket_tip(tip, tip_live, z_target, hint):
    """Interior pair (index i) of the tip grid with z_target between
    tip[i] and tip[i+1]; scans downward from the hint first so that, with
    several crossings, the outermost branch is preferred."""
    lo = 0
    hi = tip_live - 3
    if hi < lo:
        return -1
    h = hint
    if h < lo:
        h = lo
    if h > hi:
        h = hi
    span = hi - lo + 1
    for off in range(span + 1):
        i = h - off
        if i >= lo:
            if (tip[i] - z_target) * (tip[i + 1] - z_target) <= 0.0:
                return i
        i = h + off + 1
        if i <= hi:
            if (tip[i] - z_target) * (tip[i + 1] - z_target) <= 0.0:
                return i
    return -1


def advance_block(tip, rout, sti, stf, n, dr, dz, dt, slope_limit,
                  ceiling, min_tmt, min_neck, T, steps_budget,
                  right_mode, exchange_every, step_offset):
    """Advance the atlas by up to steps_budget Euler steps with overlap
    exchange, endpoint removal and stop checks after every step.

    sti (int64[5]): tip_live, out_start, out_live, hint_a, hint_b.
    stf (float64[2]): t, z_left. Both are updated in place.
    right_mode: 0 = shrinking-cylinder ODE, 1 = even reflection.
    Returns (code, steps_done).
    """
    tip_live = sti[0]
    start = sti[1]
    out_live = sti[2]
    hint_a = sti[3]
    hint_b = sti[4]
    t = stf[0]
    z_left = stf[1]
    dr2 = dr * dr
    dz2 = dz * dz
    code = CODE_NONE
    done = 0

    for _step in range(steps_budget):
        # --- tip patch Euler update (endpoint untouched) ------------------
        z0 = tip[0]
        zrr0 = 2.0 * (tip[1] - tip[0]) / dr2
        tip[0] = tip[0] + dt * (n * zrr0)
        zm = z0
        for i in range(1, tip_live - 1):
            zi = tip[i]
            p = (tip[i + 1] - zm) / (2.0 * dr)
            q = (tip[i + 1] + zm - 2.0 * zi) / dr2
            tip[i] = zi + dt * (q / (1.0 + p * p) + (n - 1) * p / (i * dr))
            zm = zi

        # --- outer patch Euler update (left endpoint untouched) -----------
        nonpos = False
        min_val = 1e300
        min_idx = -1
        rm = rout[start]
        last = start + out_live - 1
        for a in range(start + 1, last):
            ri = rout[a]
            p = (rout[a + 1] - rm) / (2.0 * dz)
            q = (rout[a + 1] + rm - 2.0 * ri) / dz2
            val = ri + dt * (q / (1.0 + p * p) - (n - 1) / ri)
            rout[a] = val
            rm = ri
            li = a - start
            if li >= 3 and not (val > 0.0):
                nonpos = True
            if 2 <= li <= out_live - 3 and val < min_val:
                min_val = val
                min_idx = a
        rl = rout[last]
        if right_mode == 0:
            val = rl + dt * (-(n - 1) / rl)
        else:
            q = (rm + rm - 2.0 * rl) / dz2
            val = rl + dt * (q - (n - 1) / rl)
        rout[last] = val
        if not (val > 0.0):
            nonpos = True

        t = t + dt
        done += 1

        # --- overlap exchange + endpoint removal ---------------------------
        if (step_offset + done) % exchange_every == 0:
            guard = 0
            while True:
                guard += 1
                if guard > tip_live + out_live + 8:
                    code = CODE_OVERLAP
                    break
                if tip_live < 4:
                    code = CODE_TIP_LOST
                    break
                r_n = (tip_live - 1) * dr
                sl = tip[tip_live - 1] - tip[tip_live - 2]
                if sl < 0.0:
                    sl = -sl
                if sl / dr > slope_limit:
                    tip_live -= 1
                    continue
                j = find_bracket_outer(rout, start, out_live, r_n, hint_a)
                if j < 0:
                    tip_live -= 1
                    continue
                hint_a = j
                break
            if code != CODE_NONE:
                break
            aj = start + j
            ra = rout[aj]
            rb = rout[aj + 1]
            za = z_left + j * dz
            if rb == ra:
                tip[tip_live - 1] = za
            else:
                tip[tip_live - 1] = za + dz * (r_n - ra) / (rb - ra)

            guard = 0
            i = -1
            while True:
                guard += 1
                if guard > tip_live + out_live + 8:
                    code = CODE_OVERLAP
                    break
                if out_live < 4:
                    code = CODE_OUTER_LOST
                    break
                if not (rout[start + 1] > 0.0):
                    start += 1
                    out_live -= 1
                    z_left += dz
                    continue
                sl = rout[start + 1] - rout[start]
                if sl < 0.0:
                    sl = -sl
                if sl / dz > slope_limit:
                    start += 1
                    out_live -= 1
                    z_left += dz
                    continue
                i = find_bracket_tip(tip, tip_live, z_left, hint_b)
                if i < 0:
                    start += 1
                    out_live -= 1
                    z_left += dz
                    continue
                hint_b = i
                break
            if code != CODE_NONE:
                break
            za2 = tip[i]
            zb2 = tip[i + 1]
            if zb2 == za2:
                rout[start] = i * dr
            else:
                rout[start] = i * dr + dr * (z_left - za2) / (zb2 - za2)

            if right_mode == 0:
                while out_live >= 4:
                    e = start + out_live - 1
                    sl = rout[e] - rout[e - 1]
                    if sl < 0.0:
                        sl = -sl
                    if sl / dz > slope_limit or not (rout[e] > 0.0):
                        out_live -= 1
                    else:
                        break
                if out_live < 4:
                    code = CODE_OUTER_LOST
                    break

        # --- stop checks ----------------------------------------------------
        zrr = 2.0 * (tip[1] - tip[0]) / dr2
        h0 = n * zrr
        if h0 != h0:
            code = CODE_TIP_LOST
            break
        if nonpos:
            code = CODE_NONPOSITIVE
            break
        if min_idx >= 0 and min_val <= min_neck:
            v = rout[min_idx]
            if rout[min_idx - 1] > v and v < rout[min_idx + 1]:
                code = CODE_NECK
                break
        if h0 >= ceiling:
            code = CODE_TIP_BLOWUP
            break
        if T - t <= min_tmt:
            code = CODE_TIME
            break

    sti[0] = tip_live
    sti[1] = start
    sti[2] = out_live
    sti[3] = hint_a
    sti[4] = hint_b
    stf[0] = t
    stf[1] = z_left
    return code, done


advance_block_py = advance_block
find_bracket_outer_py = find_bracket_outer
find_bracket_tip_py = find_bracket_tip

try:  # pragma: no cover - exercised indirectly by the engine tests
    from numba import njit

    find_bracket_outer = njit(cache=True)(find_bracket_outer)
    find_bracket_tip = njit(cache=True)(find_bracket_tip)
    advance_block = njit(cache=True)(advance_block)
    HAVE_NUMBA = True
except Exception:  # pragma: no cover
    HAVE_NUMBA = False
