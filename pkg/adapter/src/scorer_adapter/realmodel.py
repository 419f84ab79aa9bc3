"""Wrapper for COMET-family checkpoints; imported only in real-model mode.

The comet package and its checkpoints are optional at install time, so
every failure on this path must surface as an AdapterError that the
serving loop turns into a pre-handshake exit.
"""

from .core import AdapterError, Backend


def load_backend(config) -> Backend:
    try:
        from comet import download_model, load_from_checkpoint
    except ImportError as exc:
        raise AdapterError(f"real-model mode needs the comet package: {exc}")
    try:
        path = download_model(config.model_id)
        model = load_from_checkpoint(path)
    except Exception as exc:  # the loader raises assorted types for bad ids
        raise AdapterError(f"cannot load model {config.model_id!r}: {exc}")
    if hasattr(model, "eval"):
        model.eval()

    needs_ref = True
    probe = getattr(model, "requires_references", None)
    if callable(probe):
        needs_ref = bool(probe())
    elif probe is not None:
        needs_ref = bool(probe)

    gpus = 0 if config.device in ("", "cpu") else 1
    batch_size = config.batch_size

    def run(rows: list[dict]) -> list[float]:
        inputs = []
        for row in rows:
            item = {"src": row.get("src", ""), "mt": row["mt"]}
            if needs_ref:
                item["ref"] = row["ref"]
            inputs.append(item)
        output = model.predict(
            inputs, batch_size=batch_size, gpus=gpus, progress_bar=False
        )
        scores = getattr(output, "scores", None)
        if scores is None:
            scores = output[0] if isinstance(output, (tuple, list)) else output["scores"]
        return [float(score) for score in scores]

    return Backend(
        name=config.model_id, needs_src=True, needs_ref=needs_ref, run=run
    )
