"""Small shared constructors for tests."""

from fieldsense.extractor import FieldFeatures


def make_field(
    label: str = "",
    name: str = "",
    id: str = "",
    control_type: str = "text",
    url: str = "https://site.example/form",
) -> FieldFeatures:
    return FieldFeatures(
        label_text=label, name=name, id=id, control_type=control_type, page_url=url
    )
