"""Learning to reject with ideal-distribution density ratios"""
