"""Tests for attnfuse."""
