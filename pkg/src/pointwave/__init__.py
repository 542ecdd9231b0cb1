"""Wave equation with finitely many point interactions in R^3."""
