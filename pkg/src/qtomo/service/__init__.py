"""HTTP service layer: pydantic schemas, handlers, FastAPI app.

The CLI drives the same handlers in process, so every wire format has a
single definition.
"""
