import maxpy as mp

patch = mp.MaxPatch()
fundamental = patch.place("cycle~ 440")[0]
partial1 = patch.place("cycle~ 880")[0]
partial2 = patch.place("cycle~ 1320")[0]
partial3 = patch.place("cycle~ 1760")[0]
mix = patch.place("*~ 0.2")[0]
ez = patch.place("ezdac~")[0]
for osc in [fundamental, partial1, partial2, partial3]:
    patch.connect(osc.outs[0], mix.ins[0])
patch.connect(mix.outs[0], ez.ins[1])
patch.connect(mix.outs[0], ez.ins[0])
patch.save("out.maxpat")
