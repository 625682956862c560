"""Learn rewrite-rule programs from examples with a reinforcement-learned operator policy."""
