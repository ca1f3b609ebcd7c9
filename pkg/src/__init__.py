"""CEV ruin asymptotics toolkit."""
