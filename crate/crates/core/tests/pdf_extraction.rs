use std::path::Path;

use guidemap::ingest::{extract_text, Document, Extractor};
use lopdf::content::{Content, Operation};
use lopdf::{dictionary, Object, Stream};

/// A one-page PDF; `text` is drawn with Helvetica, or the page is left
/// without any text operators when `None`.
fn write_pdf(path: &Path, text: Option<&str>) {
    let mut doc = lopdf::Document::with_version("1.5");
    let pages_id = doc.new_object_id();
    let font_id = doc.add_object(dictionary! {
        "Type" => "Font",
        "Subtype" => "Type1",
        "BaseFont" => "Helvetica",
        "Encoding" => "WinAnsiEncoding",
    });
    let resources_id = doc.add_object(dictionary! {
        "Font" => dictionary! { "F1" => font_id },
    });
    let operations = match text {
        Some(t) => vec![
            Operation::new("BT", vec![]),
            Operation::new("Tf", vec!["F1".into(), 12.into()]),
            Operation::new("Td", vec![72.into(), 700.into()]),
            Operation::new("Tj", vec![Object::string_literal(t)]),
            Operation::new("ET", vec![]),
        ],
        None => {
            vec![Operation::new("re", vec![10.into(), 10.into(), 100.into(), 100.into()]), Operation::new("f", vec![])]
        }
    };
    let content = Content { operations };
    let content_id = doc.add_object(Stream::new(dictionary! {}, content.encode().unwrap()));
    let page_id = doc.add_object(dictionary! {
        "Type" => "Page",
        "Parent" => pages_id,
        "Contents" => content_id,
    });
    doc.objects.insert(
        pages_id,
        Object::Dictionary(dictionary! {
            "Type" => "Pages",
            "Kids" => vec![page_id.into()],
            "Count" => 1,
            "Resources" => resources_id,
            "MediaBox" => vec![0.into(), 0.into(), 595.into(), 842.into()],
        }),
    );
    let catalog_id = doc.add_object(dictionary! {
        "Type" => "Catalog",
        "Pages" => pages_id,
    });
    doc.trailer.set("Root", catalog_id);
    doc.save(path).unwrap();
}

fn squash(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[test]
fn both_backends_extract_a_sentence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lecture.pdf");
    write_pdf(&path, Some("Binary search trees support ordered queries."));
    for extractor in [Extractor::PdfBackendA, Extractor::PdfBackendB] {
        let text = extract_text(&path, extractor).unwrap();
        assert_eq!(squash(&text), "Binary search trees support ordered queries.", "backend {extractor}");
    }
}

#[test]
fn page_without_text_yields_empty_string() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.pdf");
    write_pdf(&path, None);
    for extractor in [Extractor::PdfBackendA, Extractor::PdfBackendB] {
        assert_eq!(extract_text(&path, extractor).unwrap().trim(), "", "backend {extractor}");
    }
}

#[test]
fn corrupt_pdf_is_an_extraction_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.pdf");
    std::fs::write(&path, b"%PDF-1.5\nthis is not a pdf").unwrap();
    for extractor in [Extractor::PdfBackendA, Extractor::PdfBackendB] {
        assert!(extract_text(&path, extractor).is_err(), "backend {extractor}");
    }
}

#[test]
fn document_load_uses_file_stem_and_normalizes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("week3.pdf");
    write_pdf(&path, Some("Sorting algorithms"));
    let doc = Document::load(&path, Extractor::PdfBackendB).unwrap();
    assert_eq!(doc.id, "week3");
    assert_eq!(squash(&doc.normalized_text), "Sorting algorithms");
}
