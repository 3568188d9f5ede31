"""Test suite for asdgic-lattice."""
