"""Business logic services"""

