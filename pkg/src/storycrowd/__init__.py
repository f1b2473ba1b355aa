"""Storycrowd: a self-hosted crowd story-ideation platform.

Role-play ideation tasks are dispatched to a worker pool with dynamic
payment and integrity-checked submissions; accepted ideas are delivered
into anchored comment threads on the writer's document and ranked by
semantic distance from the prompt.
"""

__version__ = "0.1.0"
