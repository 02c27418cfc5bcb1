"""Configuration, random streams, dataset I/O and result storage"""
