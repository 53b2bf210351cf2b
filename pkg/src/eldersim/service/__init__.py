"""HTTP service layer wrapping the core pipeline and simulator."""
