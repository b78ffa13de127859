# -*- coding: utf-8 -*-
"""
Descriptor serialization
========================

Binary layout (little-endian):

    magic     4s   b'VPRD'
    version   u16
    kind      u8   0 dense, 1 regional, 2 keypoints
    technique u8   index into TECHNIQUE_CODES

    dense:     u32 length, f64[length]
    regional:  u32 count, u32 dim, f64[count * 2] centres, f64[count * dim] vectors
    keypoints: u32 count, f64[count * 2] locations, f64[count] orientations, u8[count * 32] bits

The JSON form carries the same fields; floats are written with repr
precision and bit strings as hex, so it round-trips exactly.
"""
import json
import struct

import numpy as np

from vpr_errors import DescriptorFormatError, ImageIoError

from .base import ORB_BYTES, DenseDescriptor, DescriptorKind, KeypointDescriptor, RegionalDescriptor

MAGIC = b'VPRD'
VERSION = 1
JSON_FORMAT = 'vprkit-descriptor'

TECHNIQUE_CODES = ('hog', 'gist', 'cohog', 'orb')
KIND_CODES = (DescriptorKind.DENSE, DescriptorKind.REGIONAL, DescriptorKind.KEYPOINTS)

_HEADER = struct.Struct('<4sHBB')
_U32 = struct.Struct('<I')
_F64 = np.dtype('<f8')


# ==================== Binary ====================

def to_bytes(descriptor) -> bytes:
    if descriptor.technique not in TECHNIQUE_CODES:
        raise DescriptorFormatError(f"cannot serialize technique {descriptor.technique!r}")
    header = _HEADER.pack(MAGIC, VERSION, KIND_CODES.index(descriptor.kind),
                          TECHNIQUE_CODES.index(descriptor.technique))

    if isinstance(descriptor, DenseDescriptor):
        body = [_U32.pack(len(descriptor)), descriptor.vector.astype(_F64).tobytes()]
    elif isinstance(descriptor, RegionalDescriptor):
        body = [_U32.pack(len(descriptor)), _U32.pack(descriptor.dimension),
                descriptor.centers.astype(_F64).tobytes(),
                descriptor.vectors.astype(_F64).tobytes()]
    elif isinstance(descriptor, KeypointDescriptor):
        body = [_U32.pack(len(descriptor)),
                descriptor.locations.astype(_F64).tobytes(),
                descriptor.orientations.astype(_F64).tobytes(),
                descriptor.bits.tobytes()]
    else:
        raise DescriptorFormatError(f"not a descriptor: {type(descriptor).__name__}")
    return header + b''.join(body)


class _Reader:
    def __init__(self, data: bytes):
        self.data = memoryview(data)
        self.pos = 0

    def take(self, size: int) -> memoryview:
        if size < 0 or self.pos + size > len(self.data):
            raise DescriptorFormatError(
                f"truncated descriptor: need {size} bytes at offset {self.pos}, have {len(self.data) - self.pos}")
        chunk = self.data[self.pos:self.pos + size]
        self.pos += size
        return chunk

    def u32(self) -> int:
        return _U32.unpack(self.take(_U32.size))[0]

    def f64(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(count * 8), dtype=_F64).astype(np.float64)

    def finish(self):
        if self.pos != len(self.data):
            raise DescriptorFormatError(f"{len(self.data) - self.pos} trailing bytes after descriptor")


def from_bytes(data: bytes):
    reader = _Reader(data)
    magic, version, kind_code, technique_code = _HEADER.unpack(reader.take(_HEADER.size))
    if magic != MAGIC:
        raise DescriptorFormatError(f"bad magic {bytes(magic)!r}")
    if version != VERSION:
        raise DescriptorFormatError(f"unsupported descriptor version {version}")
    if kind_code >= len(KIND_CODES) or technique_code >= len(TECHNIQUE_CODES):
        raise DescriptorFormatError(f"unknown kind/technique code {kind_code}/{technique_code}")
    kind = KIND_CODES[kind_code]
    technique = TECHNIQUE_CODES[technique_code]

    if kind == DescriptorKind.DENSE:
        length = reader.u32()
        descriptor = DenseDescriptor(technique, reader.f64(length))
    elif kind == DescriptorKind.REGIONAL:
        count = reader.u32()
        dim = reader.u32()
        centers = reader.f64(count * 2).reshape(count, 2)
        vectors = reader.f64(count * dim).reshape(count, dim)
        descriptor = RegionalDescriptor(technique, centers, vectors)
    else:
        count = reader.u32()
        locations = reader.f64(count * 2).reshape(count, 2)
        orientations = reader.f64(count)
        bits = np.frombuffer(reader.take(count * ORB_BYTES), dtype=np.uint8).reshape(count, ORB_BYTES)
        descriptor = KeypointDescriptor(technique, locations, orientations, bits)
    reader.finish()
    return descriptor


# ==================== JSON ====================

def to_json(descriptor) -> str:
    doc = {'format': JSON_FORMAT, 'version': VERSION,
           'kind': descriptor.kind, 'technique': descriptor.technique}
    if isinstance(descriptor, DenseDescriptor):
        doc['vector'] = descriptor.vector.tolist()
    elif isinstance(descriptor, RegionalDescriptor):
        doc['centers'] = descriptor.centers.tolist()
        doc['vectors'] = descriptor.vectors.tolist()
    else:
        doc['locations'] = descriptor.locations.tolist()
        doc['orientations'] = descriptor.orientations.tolist()
        doc['bits'] = [row.tobytes().hex() for row in descriptor.bits]
    return json.dumps(doc)


def from_json(text: str):
    try:
        doc = json.loads(text)
        if doc.get('format') != JSON_FORMAT:
            raise DescriptorFormatError(f"not a {JSON_FORMAT} document")
        if doc.get('version') != VERSION:
            raise DescriptorFormatError(f"unsupported descriptor version {doc.get('version')}")
        kind = doc['kind']
        technique = doc['technique']
        if kind == DescriptorKind.DENSE:
            return DenseDescriptor(technique, doc['vector'])
        if kind == DescriptorKind.REGIONAL:
            dim = len(doc['vectors'][0]) if doc['vectors'] else 0
            return RegionalDescriptor(technique,
                                      np.reshape(np.array(doc['centers'], dtype=np.float64), (-1, 2)),
                                      np.reshape(np.array(doc['vectors'], dtype=np.float64), (-1, dim)))
        if kind == DescriptorKind.KEYPOINTS:
            bits = np.array([np.frombuffer(bytes.fromhex(h), dtype=np.uint8) for h in doc['bits']],
                            dtype=np.uint8).reshape(-1, ORB_BYTES)
            return KeypointDescriptor(technique,
                                      np.reshape(np.array(doc['locations'], dtype=np.float64), (-1, 2)),
                                      doc['orientations'], bits)
        raise DescriptorFormatError(f"unknown descriptor kind {kind!r}")
    except DescriptorFormatError:
        raise
    except (ValueError, KeyError, TypeError, AttributeError, IndexError) as e:
        raise DescriptorFormatError(f"malformed descriptor JSON: {e}") from e


# ==================== Files ====================

def save_descriptor(descriptor, path: str):
    """Binary unless the path ends in .json."""
    try:
        if path.lower().endswith('.json'):
            with open(path, 'w', encoding='utf-8') as f:
                f.write(to_json(descriptor))
        else:
            with open(path, 'wb') as f:
                f.write(to_bytes(descriptor))
    except OSError as e:
        raise ImageIoError(f"cannot write descriptor {path}: {e}") from e


def load_descriptor(path: str):
    try:
        if path.lower().endswith('.json'):
            with open(path, 'r', encoding='utf-8') as f:
                return from_json(f.read())
        with open(path, 'rb') as f:
            return from_bytes(f.read())
    except OSError as e:
        raise ImageIoError(f"cannot read descriptor {path}: {e}") from e
