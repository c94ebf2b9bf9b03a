from .csv_metadata import dispatch_to_appropriate_loader, read_csv_metadata, write_csv_metadata
