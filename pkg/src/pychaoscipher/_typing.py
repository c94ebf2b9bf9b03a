from os import PathLike


FilePath = str | PathLike
BytesLike = bytes | bytearray | memoryview
