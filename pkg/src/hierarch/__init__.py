"""Decision procedures for classes of regular languages built by polynomial closure."""
