"""Bridges pretrained vision-language encoders to SUSX embedding banks."""
from .encoders import EncoderUnavailable, ToyEncoder, UnknownEncoder, get_encoder
from .format import write_bank

__all__ = ["get_encoder", "ToyEncoder", "UnknownEncoder",
           "EncoderUnavailable", "write_bank"]

__version__ = "0.1.0"
