"""Hot loops: RNG, game rules, MCTS search, EXP3 self-play, batched UCBT."""
