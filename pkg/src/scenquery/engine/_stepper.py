# cython: language_level=3, boundscheck=False, initializedcheck=False
"""Hot kernel: single-step expansion of machine configurations.

Written in Cython pure-Python mode; `setup.py` compiles this file into an
extension module when Cython and a C compiler are available, and the plain
interpreter runs it unchanged otherwise.  `scenquery.engine.backend_info()`
reports which variant is active.

Semantics implemented here (mirrored by the independent tree-walking
simulator in `oracle.py`):

* One action is emitted per step by the active leaf.
* Interrupt conditions are checked before the step's emission: a handler
  whose condition holds fires and its body emits this step.  While a handler
  runs, only strictly higher-priority handlers are re-checked.
* A do-statement emits its child's action first and then reads its
  terminator, so every do emits at least once; bare do reads an undeclared
  input (an all-unknown stream).
* When a handler body completes, the handler subtree resets to start and
  control resumes the interrupted subtree where it left off.
* Unknown inputs fork the configuration into both truth values; the chosen
  assignments are recorded for witness reconstruction.
* Reaching a terminate statement, or completing the behavior body, ends the
  machine; terminated configurations emit the reserved end action forever.
"""
try:
    import cython
except ImportError:  # pragma: no cover - interpreter-only environments
    class _CythonShim:
        compiled = False

        @staticmethod
        def cfunc(f):
            return f

        @staticmethod
        def ccall(f):
            return f

    cython = _CythonShim()

V_FALSE = 0
V_TRUE = 1
V_UNKNOWN = 2
V_ABSENT = 3

A_END = 0  # reserved action id: machine terminated
A_ZDONE = -1  # internal marker: subtree completed without emitting

K_SEQ, K_DO, K_TRY, K_COND, K_ATOM, K_TERM = 0, 1, 2, 3, 4, 5

FLAG_TERMINATED = 1

SLOT_UNSET = 0xFF


def kernel_compiled() -> bool:
    return cython.compiled


@cython.cfunc
def _apply_reset(fm, cfg, reset_off: cython.int, reset_n: cython.int):
    arr = fm.reset_arr
    i: cython.int
    for i in range(reset_n):
        cfg[arr[(reset_off + i) * 2]] = arr[(reset_off + i) * 2 + 1]


@cython.cfunc
def _run(fm, n: cython.int, cfg, col, asg):
    """Run node `n` for one step.  Returns [(action, done, cfg, asg)].

    `cfg` is owned by this call; forks copy it.  `action` is A_ZDONE when the
    subtree completed without consuming the step.
    """
    k: cython.int = fm.kind[n]

    if k == K_ATOM:
        return [(fm.cond[n], fm.once[n], cfg, asg)]

    if k == K_TERM:
        cfg[0] |= FLAG_TERMINATED
        return [(A_END, 1, cfg, asg)]

    if k == K_DO:
        out = []
        ci: cython.int = fm.cond[n]
        for a, d, c, s in _run(fm, fm.child[n], cfg, col, asg):
            if a == A_ZDONE or d:
                out.append((a, 1, c, s))
                continue
            v: cython.int = col[ci]
            if v == V_TRUE:
                out.append((a, 1, c, s))
            elif v == V_FALSE:
                out.append((a, 0, c, s))
            elif v == V_UNKNOWN:
                c2 = bytearray(c)
                out.append((a, 1, c2, s + ((ci, 1),)))
                out.append((a, 0, c, s + ((ci, 0),)))
            # absent input: no successors
        return out

    if k == K_SEQ:
        length: cython.int = fm.seq_len[n]
        off: cython.int = fm.seq_off[n]
        slot: cython.int = fm.slot[n]
        i: cython.int = cfg[slot] if slot >= 0 else 0
        out = []
        for a, d, c, s in _run(fm, fm.seq_arr[off + i], cfg, col, asg):
            if a == A_ZDONE:
                if i + 1 < length:
                    c[slot] = i + 1
                    out.extend(_run(fm, n, c, col, s))
                else:
                    out.append((A_ZDONE, 1, c, s))
            elif d:
                if i + 1 < length:
                    c[slot] = i + 1
                    out.append((a, 0, c, s))
                else:
                    out.append((a, 1, c, s))
            else:
                out.append((a, 0, c, s))
        return out

    if k == K_TRY:
        cur: cython.int = cfg[fm.slot[n]]
        limit: cython.int = fm.try_len[n] if cur == 0 else cur - 1
        return _try_scan(fm, n, 0, limit, cfg, col, asg)

    # K_COND
    slot_c: cython.int = fm.slot[n]
    if cfg[slot_c] == SLOT_UNSET:
        return _cond_choose(fm, n, 0, cfg, col, asg)
    return _cond_run(fm, n, cfg[slot_c], cfg, col, asg)


@cython.cfunc
def _cond_choose(fm, n: cython.int, b: cython.int, cfg, col, asg):
    nb: cython.int = fm.branch_len[n]
    off: cython.int = fm.branch_off[n]
    if b == nb:
        if fm.else_child[n] >= 0:
            cfg[fm.slot[n]] = nb
            return _cond_run(fm, n, nb, cfg, col, asg)
        return [(A_ZDONE, 1, cfg, asg)]
    ci: cython.int = fm.branch_arr[(off + b) * 2]
    v: cython.int = col[ci]
    if v == V_TRUE:
        cfg[fm.slot[n]] = b
        return _cond_run(fm, n, b, cfg, col, asg)
    if v == V_FALSE:
        return _cond_choose(fm, n, b + 1, cfg, col, asg)
    if v == V_UNKNOWN:
        c2 = bytearray(cfg)
        c2[fm.slot[n]] = b
        out = _cond_run(fm, n, b, c2, col, asg + ((ci, 1),))
        out += _cond_choose(fm, n, b + 1, cfg, col, asg + ((ci, 0),))
        return out
    return []


@cython.cfunc
def _cond_run(fm, n: cython.int, b: cython.int, cfg, col, asg):
    if b == fm.branch_len[n]:
        child: cython.int = fm.else_child[n]
    else:
        child = fm.branch_arr[(fm.branch_off[n] + b) * 2 + 1]
    out = []
    for a, d, c, s in _run(fm, child, cfg, col, asg):
        out.append((a, d, c, s))
    return out


@cython.cfunc
def _try_scan(fm, n: cython.int, p: cython.int, limit: cython.int, cfg, col, asg):
    if p == limit:
        return _try_run_active(fm, n, cfg, col, asg)
    base: cython.int = (fm.try_off[n] + p) * 4
    ci: cython.int = fm.try_arr[base]
    v: cython.int = col[ci]
    if v == V_TRUE:
        cfg[fm.slot[n]] = 1 + p
        return _try_run_active(fm, n, cfg, col, asg)
    if v == V_FALSE:
        return _try_scan(fm, n, p + 1, limit, cfg, col, asg)
    if v == V_UNKNOWN:
        c2 = bytearray(cfg)
        c2[fm.slot[n]] = 1 + p
        out = _try_run_active(fm, n, c2, col, asg + ((ci, 1),))
        out += _try_scan(fm, n, p + 1, limit, cfg, col, asg + ((ci, 0),))
        return out
    return []


@cython.cfunc
def _try_run_active(fm, n: cython.int, cfg, col, asg):
    cur: cython.int = cfg[fm.slot[n]]
    out = []
    if cur == 0:
        for a, d, c, s in _run(fm, fm.child[n], cfg, col, asg):
            out.append((a, 1 if (d or a == A_ZDONE) else 0, c, s))
        return out
    p: cython.int = cur - 1
    base: cython.int = (fm.try_off[n] + p) * 4
    child: cython.int = fm.try_arr[base + 1]
    reset_off: cython.int = fm.try_arr[base + 2]
    reset_n: cython.int = fm.try_arr[base + 3]
    for a, d, c, s in _run(fm, child, cfg, col, asg):
        if d or a == A_ZDONE:
            _apply_reset(fm, c, reset_off, reset_n)
            c[fm.slot[n]] = 0
            if a == A_ZDONE:
                # handler consumed no step; fall through to the try body
                for a2, d2, c2, s2 in _run(fm, fm.child[n], c, col, s):
                    out.append((a2, 1 if (d2 or a2 == A_ZDONE) else 0, c2, s2))
            else:
                out.append((a, 0, c, s))
        else:
            out.append((a, 0, c, s))
    return out


@cython.ccall
def step_config(fm, cfg, col):
    """Expand one configuration under one input column.

    Returns a list of (action_id, new_config_bytes, assignments) where
    assignments is a tuple of (condition_index, bool_value) pairs recording
    the unknown inputs this branch committed to.
    """
    if cfg[0] & FLAG_TERMINATED:
        return [(A_END, cfg, ())]
    out = []
    for a, d, c, s in _run(fm, fm.root, bytearray(cfg), col, ()):
        if d:
            c[0] |= FLAG_TERMINATED
        out.append((A_END if a == A_ZDONE else a, bytes(c), s))
    return out


@cython.ccall
def advance_frontier(fm, frontier, col, observed_action: cython.int):
    """Advance a set of configurations by one step, keeping the branches
    that emit `observed_action`.  Returns {new_config: (parent, assigns)}."""
    out = {}
    for cfg in frontier:
        for a, c2, s in step_config(fm, cfg, col):
            if a == observed_action and c2 not in out:
                out[c2] = (cfg, s)
    return out
