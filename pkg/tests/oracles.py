"""Hand-written reference implementations of the bundled rules.

Each oracle reads a trace as a list of attribute dicts and loops over
positions directly, without touching the formula machinery. Undefined is
``None``: it propagates through subtraction, equals only itself, and makes
ordering comparisons false.
"""

from __future__ import annotations

from foepm.foe import ast as A


def get(tr, i, name):
    return tr[i - 1].get(name) if 1 <= i <= len(tr) else None


def eq(a, b):
    if a is None or b is None:
        return a is None and b is None
    return a == b


def sub(a, b):
    return None if a is None or b is None else float(a) - float(b)


def gt(a, b):
    return a is not None and b is not None and a > b


def lt(a, b):
    return a is not None and b is not None and a < b


def res(tr, i):
    return get(tr, i, "org:resource")


def grp(tr, i):
    return get(tr, i, "org:group")


def ts(tr, i):
    return get(tr, i, "time:timestamp")


def cond_pp(tr, k):
    n = len(tr)
    return any(
        i > k and not eq(res(tr, i), res(tr, i + 1)) and i + 1 <= n and eq(grp(tr, i), grp(tr, i + 1))
        for i in range(1, n + 1)
    )


def cond_pp2(tr, k):
    n = len(tr)
    return any(
        i > k
        and not eq(res(tr, i), res(tr, i + 1))
        and i + 1 <= n
        and eq(res(tr, i), res(tr, i + 2))
        and i + 2 <= n
        and eq(grp(tr, i), grp(tr, i + 1))
        and eq(grp(tr, i), grp(tr, i + 2))
        for i in range(1, n + 1)
    )


def duration(tr):
    return sub(ts(tr, len(tr)), ts(tr, 1))


def pingpong_resource(tr, k):
    return "Ping-Pong" if cond_pp(tr, k) else "Not Ping-Pong"


def pingpong_resource_or_bounce(tr, k):
    return "Ping-Pong" if cond_pp(tr, k) or cond_pp2(tr, k) else "Not Ping-Pong"


def pingpong_team(tr, k):
    n = len(tr)
    hit = any(
        i > k and not eq(grp(tr, i), grp(tr, i + 1)) and i + 1 <= n and not eq(get(tr, i, "concept:name"), "Queued")
        for i in range(1, n + 1)
    )
    return "Ping-Pong" if hit else "Not Ping-Pong"


def remaining_time(tr, k):
    return sub(ts(tr, len(tr)), ts(tr, k)) if k < len(tr) else 0.0


def next_activity(tr, k):
    return get(tr, k + 1, "concept:name") if k + 1 <= len(tr) else None


def next_lifecycle(tr, k):
    return get(tr, k + 1, "lifecycle:transition") if k + 1 <= len(tr) else None


def next_timestamp(tr, k):
    return ts(tr, k + 1) if k + 1 <= len(tr) else None


def time_to_next_event(tr, k):
    return sub(ts(tr, k + 1), ts(tr, k)) if k + 1 <= len(tr) else 0.0


def slow_cases(tr, k):
    return "Slow" if gt(duration(tr), 18_000_000) else "normal"


def slow_fast_cases(tr, k):
    if gt(duration(tr), 18_000_000):
        return "Slow"
    if lt(duration(tr), 10_800_000):
        return "Fast"
    return "normal"


def delay(tr, k):
    return "Delay" if gt(duration(tr), get(tr, 1, "expectedDuration")) else "Normal"


def step_sla_comply(tr, k):
    n = len(tr)
    ok = all((not i + 1 <= n) or lt(sub(ts(tr, i + 1), ts(tr, i)), 120_000) for i in range(1, n + 1))
    return "Comply" if ok else "Not Comply"


def step_sla_violation(tr, k):
    n = len(tr)
    bad = any(i + 1 <= n and gt(sub(ts(tr, i + 1), ts(tr, i)), 120_000) for i in range(1, n + 1))
    return "Not Comply" if bad else "Comply"


ORACLES = {
    "delay": delay,
    "next_activity": next_activity,
    "next_lifecycle": next_lifecycle,
    "next_timestamp": next_timestamp,
    "pingpong_resource": pingpong_resource,
    "pingpong_resource_or_bounce": pingpong_resource_or_bounce,
    "pingpong_team": pingpong_team,
    "remaining_time": remaining_time,
    "slow_cases": slow_cases,
    "slow_fast_cases": slow_fast_cases,
    "step_sla_comply": step_sla_comply,
    "step_sla_violation": step_sla_violation,
    "time_to_next_event": time_to_next_event,
}


def golden_table(event_log) -> dict:
    """``{rule: {trace_id: [value at k=1, ..., value at k=|trace|]}}``."""
    out = {}
    for name, fn in sorted(ORACLES.items()):
        per_trace = {}
        for trace in event_log:
            tr = [dict(e.attributes) for e in trace.events]
            vals = []
            for k in range(1, len(tr) + 1):
                v = fn(tr, k)
                vals.append(float(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else v)
            per_trace[trace.id] = vals
        out[name] = per_trace
    return out


# -- brute-force formula evaluator ------------------------------------------
# Written directly from the semantics, sharing no code with the package's
# evaluators: all()/any() over 1..|trace| at every quantifier.

def _idx(node, k, n, env):
    if isinstance(node, A.Var):
        return env[node.name]
    if isinstance(node, A.PosInt):
        return node.value
    if isinstance(node, A.Curr):
        return k
    if isinstance(node, A.Last):
        return n
    left, right = _idx(node.left, k, n, env), _idx(node.right, k, n, env)
    return left + right if isinstance(node, A.IAdd) else left - right


def _val(node, tr, k, env):
    n = len(tr)
    if isinstance(node, A.Accessor):
        return get(tr, _idx(node.index, k, n, env), node.name)
    if isinstance(node, A.IndexAsNum):
        return _idx(node.index, k, n, env)
    if isinstance(node, (A.NumLit, A.StrLit, A.BoolLit)):
        return node.value
    a, b = _val(node.left, tr, k, env), _val(node.right, tr, k, env)
    if a is None or b is None:
        return None
    return a + b if isinstance(node, A.Add) else a - b


def _kind(v):
    return "bool" if isinstance(v, bool) else ("num" if isinstance(v, (int, float)) else "str")


def _cmp(a, op, b):
    if op in ("==", "!="):
        same = (a is None and b is None) or (a is not None and b is not None and _kind(a) == _kind(b) and a == b)
        return same if op == "==" else not same
    if a is None or b is None:
        return False
    return {"<": a < b, ">": a > b, "<=": a <= b, ">=": a >= b}[op]


def brute_eval(f, tr, k, env=None):
    """Truth of ``f`` on the prefix of length ``k`` of ``tr`` (a list of dicts)."""
    env = env or {}
    n = len(tr)
    if isinstance(f, A.Atom):
        return _cmp(_val(f.left, tr, k, env), f.op, _val(f.right, tr, k, env))
    if isinstance(f, A.TrueF):
        return True
    if isinstance(f, A.FalseF):
        return False
    if isinstance(f, A.Not):
        return not brute_eval(f.body, tr, k, env)
    if isinstance(f, A.And):
        return brute_eval(f.left, tr, k, env) and brute_eval(f.right, tr, k, env)
    if isinstance(f, A.Or):
        return brute_eval(f.left, tr, k, env) or brute_eval(f.right, tr, k, env)
    if isinstance(f, A.Implies):
        return (not brute_eval(f.left, tr, k, env)) or brute_eval(f.right, tr, k, env)
    values = (brute_eval(f.body, tr, k, {**env, f.var: c}) for c in range(1, n + 1))
    return any(values) if isinstance(f, A.Exists) else all(values)
