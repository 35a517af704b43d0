const mix = ctx.createGain();
mix.gain.value = 0.2;
for (const f of [440, 880, 1320, 1760]) {
  const osc = ctx.createOscillator();
  osc.frequency.value = f;
  osc.connect(mix);
  osc.start();
}
mix.connect(ctx.destination);
