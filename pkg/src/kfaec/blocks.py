"""Block geometry, DFT helpers and the partitioned-block overlap-save convolver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BlockSpec:
    """Frame geometry shared by every processing stage.

    shift: block advance R in samples
    dft_len: DFT length M = 2R
    partitions: number of filter partitions B
    filter_len: overall FIR length L = B*R
    """

    shift: int
    dft_len: int
    partitions: int
    filter_len: int

    def __post_init__(self):
        if min(self.shift, self.dft_len, self.partitions, self.filter_len) < 1:
            raise ValueError("all BlockSpec fields must be >= 1")
        if self.dft_len != 2 * self.shift:
            raise ValueError("dft_len must equal 2 * shift")
        if self.filter_len != self.partitions * self.shift:
            raise ValueError("filter_len must equal partitions * shift")

    @classmethod
    def create(cls, shift: int, partitions: int) -> "BlockSpec":
        return cls(shift, 2 * shift, partitions, partitions * shift)


def dft(block, dft_len: int | None = None) -> np.ndarray:
    """Unnormalized forward DFT; the inverse is idft (applies 1/M)."""
    block = np.asarray(block)
    if dft_len is not None and block.shape != (dft_len,):
        raise ValueError(f"expected length {dft_len}, got {block.shape}")
    return np.fft.fft(block)


def idft(spectrum, dft_len: int | None = None) -> np.ndarray:
    spectrum = np.asarray(spectrum)
    if dft_len is not None and spectrum.shape != (dft_len,):
        raise ValueError(f"expected length {dft_len}, got {spectrum.shape}")
    return np.fft.ifft(spectrum)


def spectrum_from_block(block, spec: BlockSpec) -> np.ndarray:
    """DFT-domain version of a length-R time block: F [0_R; block]."""
    block = np.asarray(block, dtype=float)
    if block.shape != (spec.shift,):
        raise ValueError(f"expected block of length {spec.shift}")
    return np.fft.fft(np.concatenate([np.zeros(spec.shift), block]))


def block_from_spectrum(spectrum, spec: BlockSpec) -> np.ndarray:
    """Last R samples of the inverse DFT (overlap-save output selection)."""
    spectrum = np.asarray(spectrum)
    if spectrum.shape != (spec.dft_len,):
        raise ValueError(f"expected spectrum of length {spec.dft_len}")
    return np.fft.ifft(spectrum).real[spec.shift:]


class FarEndBuffer:
    """Delay chain of far-end samples with per-partition DFT-domain blocks.

    Partition b holds the DFT of the length-M far-end segment delayed by
    b*R samples; advancing by one block shifts partition b into b+1.
    """

    def __init__(self, spec: BlockSpec):
        self.spec = spec
        self.history = np.zeros((spec.partitions + 1) * spec.shift)
        self.spectra = np.zeros((spec.partitions, spec.dft_len), dtype=complex)

    def advance(self, new_samples) -> None:
        x = np.asarray(new_samples, dtype=float)
        if x.shape != (self.spec.shift,):
            raise ValueError(f"expected block of length {self.spec.shift}")
        r = self.spec.shift
        self.history = np.concatenate([self.history[r:], x])
        self.spectra[1:] = self.spectra[:-1]
        self.spectra[0] = np.fft.fft(self.history[-self.spec.dft_len:])

    def partition_block(self, b: int) -> np.ndarray:
        """Time-domain length-M segment backing partition b."""
        end = self.history.size - b * self.spec.shift
        return self.history[end - self.spec.dft_len:end]


def pbc_early_echo(filters, buffer: FarEndBuffer):
    """Partitioned-block convolution of the far-end with B filter partitions.

    Returns the length-R time block (overlap-save tail) and its
    constrained DFT-domain equivalent.
    """
    filters = np.asarray(filters)
    if filters.shape != buffer.spectra.shape:
        raise ValueError(
            f"expected {buffer.spectra.shape} filter partitions, got {filters.shape}")
    summed = np.sum(buffer.spectra * filters, axis=0)
    tail = np.fft.ifft(summed).real[buffer.spec.shift:]
    spectrum = spectrum_from_block(tail, buffer.spec)
    return tail, spectrum


def apply_gradient_constraint(spectrum) -> np.ndarray:
    """Project a filter spectrum onto time responses supported on the first R samples."""
    spectrum = np.asarray(spectrum)
    m = spectrum.shape[-1]
    if m % 2:
        raise ValueError("spectrum length must be even (M = 2R)")
    r = m // 2
    head = np.fft.ifft(spectrum)
    head[..., r:] = 0.0
    return np.fft.fft(head)


def filter_partitions_from_fir(fir, spec: BlockSpec) -> np.ndarray:
    """Split a length-L FIR into B zero-padded DFT-domain partitions."""
    fir = np.asarray(fir, dtype=float)
    if fir.shape != (spec.filter_len,):
        raise ValueError(f"expected FIR of length {spec.filter_len}")
    parts = fir.reshape(spec.partitions, spec.shift)
    padded = np.concatenate(
        [parts, np.zeros((spec.partitions, spec.shift))], axis=1)
    return np.fft.fft(padded, axis=1)
