"""End-to-end runs of the attnfuse commands on generated datasets."""
