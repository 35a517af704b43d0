#!/usr/bin/env python3
"""Writes the synthetic replay corpus: one chat response per
(category, benchmark, index) under responses/.

The responses are hand-written PatchScript templates with seeded variation
and a fixed share of broken or off-target programs. They stand in for
model output so the full pipeline can run offline.
"""

import random
from pathlib import Path

SEED = 7
N = 10
ROOT = Path(__file__).resolve().parent / "responses"

BENCHMARKS = [
    "additive", "am", "fm", "lfo", "filtered-noise",
    "church-bell", "dial-tone", "bird-call", "ocean-waves", "babbling-brook",
]
SPECIFIC = set(BENCHMARKS[:5])
NOUNS = {
    "additive": "additive synthesis",
    "am": "AM synthesis",
    "fm": "FM synthesis",
    "lfo": "an LFO",
    "filtered-noise": "filtered noise",
    "church-bell": "a church bell",
    "dial-tone": "a telephone dial tone",
    "bird-call": "a bird call",
    "ocean-waves": "the sound of waves hitting the ocean",
    "babbling-brook": "a babbling brook",
}

EXAMPLE = """let fundamental = place("cycle~ 440")
let mix = place("*~ 0.2")
let ez = place("ezdac~")
connect(fundamental.out[0], mix.in[0])
connect(mix.out[0], ez.in[0])
emit()
"""


def out(src="mix"):
    return (
        'let ez = place("ezdac~")\n'
        f"connect({src}.out[0], ez.in[0])\n"
        f"connect({src}.out[0], ez.in[1])\n"
        "emit()\n"
    )


# plain programs --------------------------------------------------------

def additive(r):
    f0 = r.choice([220, 330, 440])
    count = r.choice([3, 4])
    lines = [f'let p{i} = place("cycle~ {f0 * (i + 1)}")' for i in range(count)]
    lines.append('let mix = place("*~ 0.2")')
    lines += [f"connect(p{i}.out[0], mix.in[0])" for i in range(count)]
    return "\n".join(lines) + "\n" + out()


def am(r):
    fc = r.choice([440, 520, 660])
    fm = r.choice([60, 90, 110, 150])
    return f"""let carrier = place("cycle~ {fc}")
let modulator = place("cycle~ {fm}")
let depth = place("*~ 0.5")
let offset = place("sig~ 1")
let vca = place("*~ 0")
let mix = place("*~ 0.4")
connect(modulator.out[0], depth.in[0])
connect(depth.out[0], vca.in[1])
connect(offset.out[0], vca.in[1])
connect(carrier.out[0], vca.in[0])
connect(vca.out[0], mix.in[0])
""" + out()


def fm(r):
    fc = r.choice([440, 500, 660])
    fm_ = r.choice([80, 110, 130])
    dev = fm_ * r.choice([2, 3])
    return f"""let modulator = place("cycle~ {fm_}")
let index = place("*~ {dev}")
let carrier = place("cycle~ {fc}")
let mix = place("*~ 0.5")
connect(modulator.out[0], index.in[0])
connect(index.out[0], carrier.in[0])
connect(carrier.out[0], mix.in[0])
""" + out()


def lfo(r):
    rate = r.choice([1, 2, 3])
    tone = r.choice([330, 440, 550])
    return f"""let tone = place("cycle~ {tone}")
let lfo = place("cycle~ {rate}")
let depth = place("*~ 0.4")
let offset = place("sig~ 0.5")
let mix = place("*~ 0")
connect(lfo.out[0], depth.in[0])
connect(depth.out[0], mix.in[1])
connect(offset.out[0], mix.in[1])
connect(tone.out[0], mix.in[0])
""" + out()


def filtered_noise(r):
    obj = r.choice(["lores~ 1000 0.7", "hipass~ 3000 0.7", "bandpass~ 1500 4"])
    return f"""let source = place("noise~")
let filter = place("{obj}")
let mix = place("*~ 0.5")
connect(source.out[0], filter.in[0])
connect(filter.out[0], mix.in[0])
""" + out()


def church_bell(r):
    base = r.choice([196, 220, 262])
    ratios = [0.5, 1.0, 1.19, 1.56, 2.0]
    lines = [f'let p{i} = place("cycle~", {base} * {ratio})' for i, ratio in enumerate(ratios)]
    lines.append('let mix = place("*~ 0.15")')
    lines += [f"connect(p{i}.out[0], mix.in[0])" for i in range(len(ratios))]
    return "\n".join(lines) + "\n" + out()


def dial_tone(r):
    return """let low = place("cycle~ 350")
let high = place("cycle~ 440")
let mix = place("*~ 0.3")
connect(low.out[0], mix.in[0])
connect(high.out[0], mix.in[0])
""" + out()


def bird_call(r):
    rate = r.choice([5, 7, 9])
    return f"""let chirp = place("cycle~ {rate}")
let sweep = place("*~ 800")
let voice = place("cycle~ 2500")
let mix = place("*~ 0.3")
connect(chirp.out[0], sweep.in[0])
connect(sweep.out[0], voice.in[0])
connect(voice.out[0], mix.in[0])
""" + out()


def ocean_waves(r):
    return """let surf = place("noise~")
let tone = place("lores~ 600 0.7")
let swell = place("cycle~ 0.15")
let depth = place("*~ 0.3")
let offset = place("sig~ 0.4")
let mix = place("*~ 0")
connect(surf.out[0], tone.in[0])
connect(tone.out[0], mix.in[0])
connect(swell.out[0], depth.in[0])
connect(depth.out[0], mix.in[1])
connect(offset.out[0], mix.in[1])
""" + out()


def babbling_brook(r):
    return """let water = place("noise~")
let bubbles = place("bandpass~ 1200 6")
let wobble = place("cycle~ 3")
let range = place("*~ 400")
let mix = place("*~ 0.6")
connect(water.out[0], bubbles.in[0])
connect(wobble.out[0], range.in[0])
connect(range.out[0], bubbles.in[1])
connect(bubbles.out[0], mix.in[0])
""" + out()


# rich programs ---------------------------------------------------------

def additive_rich(r):
    f0 = r.choice([220, 330, 440])
    count = r.randint(6, 9)
    return f"""let fundamental = {f0}
let mix = place("*~ 0.15")
for i in 1..{count + 1} {{
    let partial = place("cycle~", fundamental * i + random(-5, 5))
    let level = place("*~", 1 / i)
    connect(partial.out[0], level.in[0])
    connect(level.out[0], mix.in[0])
}}
""" + out()


def am_rich(r):
    fc = r.choice([440, 520, 660])
    fm = r.choice([60, 90, 110, 150])
    voices = r.randint(3, 5)
    return f"""let carrier = place("cycle~ {fc}")
let offset = place("sig~ 1")
let vca = place("*~ 0")
connect(offset.out[0], vca.in[1])
connect(carrier.out[0], vca.in[0])
for i in 0..{voices} {{
    let modulator = place("cycle~ {fm}")
    let depth = place("*~", 0.5 / {voices} + random(0, 0.02))
    connect(modulator.out[0], depth.in[0])
    connect(depth.out[0], vca.in[1])
}}
let mix = place("*~ 0.4")
connect(vca.out[0], mix.in[0])
""" + out()


def fm_rich(r):
    fc = r.choice([440, 500, 660])
    fm_ = r.choice([80, 110, 130])
    stages = r.randint(3, 5)
    dev = fm_ * 2
    return f"""let carrier = place("cycle~ {fc}")
for i in 0..{stages} {{
    let modulator = place("cycle~ {fm_}")
    let index = place("*~", {dev} / {stages} + random(-10, 10))
    connect(modulator.out[0], index.in[0])
    connect(index.out[0], carrier.in[0])
}}
let mix = place("*~ 0.5")
connect(carrier.out[0], mix.in[0])
""" + out()


def lfo_rich(r):
    rate = r.choice([1, 2, 3])
    voices = r.randint(3, 6)
    return f"""let lfo = place("cycle~ {rate}")
let depth = place("*~ 0.4")
let offset = place("sig~ 0.5")
connect(lfo.out[0], depth.in[0])
let mix = place("*~", 1 / {voices})
for i in 0..{voices} {{
    let tone = place("cycle~", 220 * (i + 1) + random(-3, 3))
    let vca = place("*~ 0")
    connect(tone.out[0], vca.in[0])
    connect(depth.out[0], vca.in[1])
    connect(offset.out[0], vca.in[1])
    connect(vca.out[0], mix.in[0])
}}
""" + out()


def filtered_noise_rich(r):
    stages = r.randint(3, 6)
    return f"""let source = place("noise~")
let first = place("lores~", 1000 + random(-50, 50), 0.7)
connect(source.out[0], first.in[0])
let mix = place("*~ 0.8")
connect(first.out[0], mix.in[0])
for i in 0..{stages} {{
    let stage = place("lores~", 1000 + random(-100, 100), 0.7)
    let level = place("*~ 0.1")
    connect(first.out[0], stage.in[0])
    connect(stage.out[0], level.in[0])
    connect(level.out[0], mix.in[0])
}}
""" + out()


def church_bell_rich(r):
    base = r.choice([196, 220, 262])
    count = r.randint(6, 10)
    return f"""let base = {base}
let mix = place("*~ 0.1")
for i in 0..{count} {{
    let partial = place("cycle~", base * (0.5 + i * random(0.4, 0.7)))
    let level = place("*~", random(0.2, 1))
    connect(partial.out[0], level.in[0])
    connect(level.out[0], mix.in[0])
}}
""" + out()


def dial_tone_rich(r):
    layers = r.randint(2, 4)
    return f"""let mix = place("*~ 0.1")
for i in 0..{layers} {{
    let low = place("cycle~", 350 + random(-1, 1))
    let high = place("cycle~", 440 + random(-1, 1))
    connect(low.out[0], mix.in[0])
    connect(high.out[0], mix.in[0])
}}
""" + out()


def bird_call_rich(r):
    birds = r.randint(2, 4)
    return f"""let mix = place("*~", 0.6 / {birds})
for i in 0..{birds} {{
    let chirp = place("cycle~", random(4, 12))
    let sweep = place("*~", random(400, 1200))
    let voice = place("cycle~", random(2000, 4000))
    connect(chirp.out[0], sweep.in[0])
    connect(sweep.out[0], voice.in[0])
    connect(voice.out[0], mix.in[0])
}}
""" + out()


def ocean_waves_rich(r):
    layers = r.randint(2, 4)
    return f"""let mix = place("*~", 0.8 / {layers})
for i in 0..{layers} {{
    let surf = place("noise~")
    let tone = place("lores~", random(300, 900), 0.7)
    let swell = place("cycle~", random(0.08, 0.25))
    let depth = place("*~ 0.3")
    let offset = place("sig~ 0.4")
    let vca = place("*~ 0")
    connect(surf.out[0], tone.in[0])
    connect(tone.out[0], vca.in[0])
    connect(swell.out[0], depth.in[0])
    connect(depth.out[0], vca.in[1])
    connect(offset.out[0], vca.in[1])
    connect(vca.out[0], mix.in[0])
}}
""" + out()


def babbling_brook_rich(r):
    streams = r.randint(3, 6)
    return f"""let water = place("noise~")
let mix = place("*~", 1 / {streams})
for i in 0..{streams} {{
    let bubbles = place("bandpass~", random(600, 2400), 8)
    let wobble = place("cycle~", random(2, 9))
    let range = place("*~", random(100, 500))
    connect(water.out[0], bubbles.in[0])
    connect(wobble.out[0], range.in[0])
    connect(range.out[0], bubbles.in[1])
    connect(bubbles.out[0], mix.in[0])
}}
""" + out()


PLAIN = {
    "additive": additive, "am": am, "fm": fm, "lfo": lfo,
    "filtered-noise": filtered_noise, "church-bell": church_bell,
    "dial-tone": dial_tone, "bird-call": bird_call,
    "ocean-waves": ocean_waves, "babbling-brook": babbling_brook,
}
RICH = {
    "additive": additive_rich, "am": am_rich, "fm": fm_rich, "lfo": lfo_rich,
    "filtered-noise": filtered_noise_rich, "church-bell": church_bell_rich,
    "dial-tone": dial_tone_rich, "bird-call": bird_call_rich,
    "ocean-waves": ocean_waves_rich, "babbling-brook": babbling_brook_rich,
}


# off-target and broken variants ----------------------------------------

def off_target(bench):
    if bench == "filtered-noise":
        return 'let source = place("noise~")\nlet mix = place("*~ 0.5")\nconnect(source.out[0], mix.in[0])\n' + out()
    if bench == "lfo":
        return 'let tone = place("cycle~ 440")\nlet mix = place("*~ 0.5")\nconnect(tone.out[0], mix.in[0])\n' + out()
    return 'let tone = place("cycle~ 440")\n' + out("tone")


def break_syntax(code, r):
    kind = r.randrange(3)
    if kind == 0 and "connect(" in code:
        i = code.index("connect(")
        j = code.index(",", i)
        return code[:j] + code[j + 1:]
    if kind == 1 and "for i in" in code:
        head = code[code.index("for i in"):].split("\n", 1)[0]
        n = head.split("..")[1].split(" ")[0]
        return code.replace(head, f"for i in range({n}):")
    return code.replace('place("', 'place(("', 1)


def break_runtime(code, r):
    kind = r.randrange(3)
    if kind == 0:
        return code.replace("emit()\n", "")
    if kind == 1:
        return code.replace("ez.in[1]", "ez.in[2]")
    return code.replace('place("ezdac~")', 'place("phasor~")')


# responses --------------------------------------------------------------

INTROS = [
    "Here is a PatchScript program that implements {noun}.",
    "Sure! The following patch implements {noun}.",
    "Below is one way to build {noun} in PatchScript.",
    "This program builds {noun}:",
]
OUTROS = [
    "The final gain keeps the output below clipping.",
    "Both dac channels receive the same signal.",
    "",
    "Adjust the numbers to taste.",
]


def response(code, noun, r):
    parts = []
    if r.random() < 0.15:
        parts.append("Following the example you gave:\n\n```\n" + EXAMPLE + "```\n")
    parts.append(r.choice(INTROS).format(noun=noun))
    lang = r.choice(["", "patchscript", "text"])
    parts.append(f"\n```{lang}\n{code}```\n")
    outro = r.choice(OUTROS)
    if outro:
        parts.append(outro + "\n")
    return "\n".join(parts)


def sample(category, bench, index):
    r = random.Random(f"{SEED}|{category}|{bench}|{index}")
    rich = category.endswith("-rich")
    code = (RICH if rich else PLAIN)[bench](r)
    roll = r.random()
    syntax, runtime, wrong = (0.2, 0.15, 0.2) if rich else (0.15, 0.1, 0.2)
    if roll < syntax:
        code = break_syntax(code, r)
    elif roll < syntax + runtime:
        code = break_runtime(code, r)
    elif bench in SPECIFIC and roll < syntax + runtime + wrong:
        code = off_target(bench)
    return response(code, NOUNS[bench], r)


def main():
    for category in ["patchscript", "patchscript-rich"]:
        for bench in BENCHMARKS:
            for index in range(N):
                path = ROOT / category / bench / f"{index}.txt"
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(sample(category, bench, index))


if __name__ == "__main__":
    main()
