"""Tests for ov-approx"""
