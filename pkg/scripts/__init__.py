"""Reporting scripts for the DP two-stage ERM experiments"""
