from s2c_compliance.catalog import load_catalog
from s2c_compliance.catalog import save_catalog
from s2c_compliance.fixture_catalog import build_fixture_catalog
from s2c_compliance.helpers.spec import FIXTURE_160_CATALOG
from s2c_compliance.helpers.spec import SAMPLE_CATALOG
from s2c_compliance.helpers.spec import data_path


def main():
    """Regenerates the shipped catalogs.

    The fixture-160 catalog is built from code, and the sample catalog is rewritten in
    canonical form so that hand edits keep the ordering and formatting that
    ``save_catalog`` produces (tests compare the files byte for byte).
    """
    save_catalog(build_fixture_catalog(), data_path(FIXTURE_160_CATALOG))

    sample_path = data_path(SAMPLE_CATALOG)
    save_catalog(load_catalog(sample_path), sample_path)


if __name__ == "__main__":
    main()
