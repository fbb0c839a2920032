"""Tests for the miner."""
