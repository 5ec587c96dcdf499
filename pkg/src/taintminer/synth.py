"""Small synthetic SmartApps.

``random_app`` draws short apps that exercise reordering, kills, nested
conditionals, helper indirection and multi-argument calls; they feed the
miner/oracle agreement checks.  ``seed_app`` builds benign apps whose
statements can be reordered, wrapped and re-argued by :mod:`taintminer.mutgen`.

Both emit text already in normalized form (one statement per line), which is
the input the reference interpreter understands.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

__all__ = ["random_app", "seed_app", "seed_apps"]

_SOURCE_POOL = ["phone", "code", "contact", "pin", "owner", "secret"]
_LOCAL_POOL = ["msg", "text", "body", "note", "alert", "label"]
_SINK_POOL = ["sendSms", "sendPush", "httpPost", "sendNotification"]
_WORDS = [
    "door", "lamp", "garage", "motion", "window", "porch", "kitchen", "heater", "valve", "siren",
    "shade", "alarm", "fan", "lock", "vent", "sprinkler", "camera", "bell", "oven", "pool",
]


@dataclass
class _Writer:
    rng: random.Random
    sources: list[str]
    helpers: dict[str, int] = field(default_factory=dict)  # name -> arity
    lines: list[str] = field(default_factory=list)
    _start: int = 0  # first line of the method being filled

    def emit(self, depth: int, text: str) -> None:
        self.lines.append("    " * depth + text)

    # ------------------------------------------------------------ pieces
    def value(self, locals_: list[str]) -> str:
        r = self.rng
        pool = self.sources + locals_
        choice = r.randrange(7)
        if choice == 0 or not pool:
            return f'"{r.choice(_WORDS)}"'
        if choice == 1:
            return str(r.randrange(100))
        if choice == 2:
            return f'"{r.choice(_WORDS)} ${{{r.choice(pool)}}}"'
        if choice == 3:
            return f'{r.choice(pool)} + "{r.choice(_WORDS)}"'
        if choice == 4:
            return f"format({r.choice(pool)})"
        return r.choice(pool)

    def condition(self, locals_: list[str]) -> str:
        r = self.rng
        pool = self.sources + locals_ or ["location"]
        v = r.choice(pool)
        return r.choice([f'{v} == "{r.choice(_WORDS)}"', v, f"location.mode != {v}", f"check({v})", "enabled"])

    def sink_call(self, locals_: list[str]) -> str:
        r = self.rng
        sink = r.choice(_SINK_POOL)
        if sink == "httpPost":
            return f'httpPost(uri: "http://x.io", body: {self.value(locals_)})'
        if sink == "sendSms":
            return f"sendSms({self.value(locals_)}, {self.value(locals_)})"
        if r.random() < 0.3:
            return f"{sink} {self.value(locals_)}"
        return f"{sink}({self.value(locals_)})"

    def helper_call(self, locals_: list[str]) -> str:
        name = self.rng.choice(sorted(self.helpers))
        args = ", ".join(self.value(locals_) for _ in range(self.helpers[name]))
        return f"{name}({args})"

    # ------------------------------------------------------------ statements
    def block(self, depth: int, locals_: list[str], room: int) -> None:
        r = self.rng
        for _ in range(r.randint(1, 4)):
            left = room - (len(self.lines) - self._start)
            if left < 1:
                return
            kind = r.random()
            if kind < 0.35:
                target = r.choice(_LOCAL_POOL)
                if target not in locals_:
                    locals_.append(target)
                    self.emit(depth, f"def {target} = {self.value(locals_[:-1])}")
                elif r.random() < 0.2:
                    self.emit(depth, f"{target} += {self.value(locals_)}")
                else:
                    self.emit(depth, f"{target} = {self.value(locals_)}")
            elif kind < 0.6:
                self.emit(depth, self.sink_call(locals_))
            elif kind < 0.72 and self.helpers:
                self.emit(depth, self.helper_call(locals_))
            elif kind < 0.78:
                self.emit(depth, f'log.debug "{r.choice(_WORDS)}"')
            elif depth < 2 and left >= 3:
                self.emit(depth, f"if ({self.condition(locals_)}) {{")
                self.block(depth + 1, locals_, room)
                self.emit(depth, "}")
                for tail in range(r.choice([0, 0, 1, 2])):
                    if room - (len(self.lines) - self._start) < 3:
                        break
                    if tail == 0 and r.random() < 0.5:
                        self.emit(depth, f"else if ({self.condition(locals_)}) {{")
                    else:
                        self.emit(depth, "else {")
                        self.block(depth + 1, locals_, room)
                        self.emit(depth, "}")
                        break
                    self.block(depth + 1, locals_, room)
                    self.emit(depth, "}")


def random_app(rng: random.Random, max_lines: int = 30) -> str:
    """A random app of at most ``max_lines`` normalized lines."""
    while True:
        text = _random_app(rng, max_lines)
        if text.count("\n") <= max_lines:
            return text


def _random_app(rng: random.Random, max_lines: int) -> str:
    sources = rng.sample(_SOURCE_POOL, rng.randint(1, 2))
    w = _Writer(rng, sources)
    w.emit(0, "preferences {")
    for s in sources:
        if rng.random() < 0.5:
            w.emit(1, f'input "{s}", "text", title: "{s.title()}"')
        else:
            w.emit(1, f'input(title: "{s.title()}", name: "{s}", type: "text")')
    w.emit(0, "}")

    for k in range(rng.choice([0, 1, 1, 2])):
        helper = f"relay{k}"
        params = rng.sample(["level", "text", "target", "extra"], rng.randint(1, 3))
        w.emit(0, f"def {helper}({', '.join(params)}) {{")
        w._start = len(w.lines)
        used = rng.choice(params)
        sink = rng.choice(_SINK_POOL[:2])
        if rng.random() < 0.8:
            if sink == "sendSms":
                other = [p for p in params if p != used]
                args = [used, rng.choice(other) if other else '"555"']
                rng.shuffle(args)
            else:
                args = [used]
            w.emit(1, f"{sink}({', '.join(args)})")
        else:
            w.emit(1, f'log.debug "{rng.choice(_WORDS)}"')
        w.emit(0, "}")
        w.helpers[helper] = len(params)

    handler = f"{rng.choice(_WORDS)}Handler"
    w.emit(0, f"def {handler}(evt) {{")
    w._start = len(w.lines)
    room = max(3, max_lines - len(w.lines) - 1)
    w.block(1, [], room)
    w.emit(0, "}")
    return "\n".join(w.lines) + "\n"


# ----------------------------------------------------------------- seeds


def seed_app(rng: random.Random, index: int) -> str:
    """A benign app holding one instance of each mutation site.

    * a taint followed by its kill before a sink call (reorder target),
    * a clean sink call right after a block guarded by a source (wrap target),
    * a helper whose first parameter reaches a sink, called with the
      source in its second slot (argument-swap target),

    padded with independent filler statements whose vocabulary varies from
    seed to seed.
    """
    words = rng.sample(_WORDS, 8)
    src_a, src_b = rng.sample(_SOURCE_POOL, 2)
    local = rng.choice(_LOCAL_POOL)
    sink_a, sink_b, sink_c = (rng.choice(_SINK_POOL[:2]) for _ in range(3))
    handler = f"{words[0]}Handler"
    helper = f"relay{index}"
    attr = rng.choice(["switch", "motion", "contact", "presence"])

    def sink(name: str, arg: str) -> str:
        return f'sendSms("555", {arg})' if name == "sendSms" else f"{name}({arg})"

    filler = [
        f'def {words[1]} = "{words[2]}"',
        f'log.debug "{words[3]} ready"',
        f"state.{words[4]} = {rng.randrange(10, 99)}",
        f'{words[5]}.{rng.choice(["on", "off", "refresh"])}()',
        f'def {words[6]}Count = {rng.randrange(2, 9)}',
    ]
    rng.shuffle(filler)
    body = [
        f'def {local} = "{words[7]}"',
        filler[0],
        f"{local} = {src_a}",
        filler[1],
        f'{local} = "{words[2]}"',
        sink(sink_a, local),
        f'if ({src_b} == "{words[3]}") {{',
        f'    log.debug "{words[1]}"',
        "}",
        sink(sink_b, f'"{words[6]}"'),
        filler[2],
        f'{helper}("{words[5]}", {src_a})',
        *filler[3:],
    ]
    lines = [
        f'definition(name: "{words[0].title()} Watch {index}", namespace: "mut", author: "gen")',
        "preferences {",
        '    section("Setup") {',
        f'        input "{words[5]}", "capability.{attr}", title: "Device"',
        f'        input "{src_a}", "phone", title: "Number"',
        f'        input(name: "{src_b}", type: "text", title: "Code")',
        "    }",
        "}",
        "def installed() {",
        "    initialize()",
        "}",
        "def initialize() {",
        f'    subscribe({words[5]}, "{attr}", {handler})',
        "}",
        f"def {handler}(evt) {{",
        *("    " + ln for ln in body),
        "}",
        f"def {helper}(text, level) {{",
        "    " + sink(sink_c, "text"),
        '    log.debug "level ${level}"',
        "}",
    ]
    return "\n".join(lines) + "\n"


def seed_apps(count: int, seed: int = 0) -> list[tuple[str, str]]:
    """``count`` (name, text) seed apps."""
    rng = random.Random(seed)
    return [(f"seed{i:02d}", seed_app(rng, i)) for i in range(count)]
