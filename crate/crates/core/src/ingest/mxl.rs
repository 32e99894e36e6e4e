//! Compressed MusicXML (`.mxl`): a ZIP archive whose `META-INF/container.xml`
//! names the root score file.

use std::io::{Cursor, Read};

use zip::ZipArchive;

use crate::error::{Error, Result};

const ZIP_MAGIC: &[u8] = b"PK\x03\x04";

pub fn is_mxl(bytes: &[u8]) -> bool {
    bytes.starts_with(ZIP_MAGIC)
}

/// Extract the root MusicXML document from an `.mxl` archive.
pub fn extract_root_document(bytes: &[u8]) -> Result<String> {
    let mut archive =
        ZipArchive::new(Cursor::new(bytes)).map_err(|e| Error::Container(format!("cannot open archive: {e}")))?;

    let container = read_entry(&mut archive, "META-INF/container.xml")
        .map_err(|_| Error::Container("missing META-INF/container.xml".into()))?;
    let root_path = {
        let doc =
            roxmltree::Document::parse(&container).map_err(|e| Error::Container(format!("container.xml: {e}")))?;
        doc.descendants()
            .filter(|n| n.has_tag_name("rootfile"))
            .find_map(|n| n.attribute("full-path"))
            .map(str::to_string)
            .ok_or_else(|| Error::Container("container.xml names no rootfile".into()))?
    };
    read_entry(&mut archive, &root_path)
}

fn read_entry(archive: &mut ZipArchive<Cursor<&[u8]>>, name: &str) -> Result<String> {
    let mut file = archive
        .by_name(name)
        .map_err(|e| Error::Container(format!("'{name}': {e}")))?;
    let mut text = String::new();
    file.read_to_string(&mut text)
        .map_err(|e| Error::Container(format!("'{name}': {e}")))?;
    Ok(text)
}
