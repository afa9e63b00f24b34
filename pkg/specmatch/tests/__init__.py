"""Tests for SpecMatch"""
