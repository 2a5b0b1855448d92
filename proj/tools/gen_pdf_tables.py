#!/usr/bin/env python3
"""Generate src/ingest/pdf_tables.cpp from reportlab's copies of the Adobe
encoding vectors, glyph list and standard-14 font metrics.

Usage: python3 tools/gen_pdf_tables.py > src/ingest/pdf_tables.cpp
"""
import inspect
import sys

from reportlab.pdfbase import _glyphlist
from reportlab.pdfbase._fontdata_enc_winansi import WinAnsiEncoding
from reportlab.pdfbase._fontdata_enc_macroman import MacRomanEncoding
from reportlab.pdfbase._fontdata_enc_standard import StandardEncoding
from reportlab.pdfbase._fontdata_enc_pdfdoc import PDFDocEncoding
from reportlab.pdfbase import _fontdata_widths_helvetica as helv
from reportlab.pdfbase import _fontdata_widths_helveticabold as helvb
from reportlab.pdfbase import _fontdata_widths_timesroman as times
from reportlab.pdfbase import _fontdata_widths_timesbold as timesb

names = _glyphlist._glyphname2unicode


def adobe_notice():
    src = inspect.getsource(_glyphlist).splitlines()
    out = []
    for line in src:
        if not line.startswith("#"):
            break
        out.append("//" + line[1:])
    return "\n".join(out)


def code_table(name, enc):
    vals = []
    for glyph in enc:
        cp = names.get(glyph, 0) if glyph else 0
        vals.append(cp)
    rows = []
    for i in range(0, 256, 8):
        rows.append("    " + ", ".join("0x%04X" % v for v in vals[i:i + 8]) + ",")
    return "const std::array<char32_t, 256> %s = {{\n%s\n}};\n" % (name, "\n".join(rows))


def width_table(name, module):
    vals = []
    for glyph in WinAnsiEncoding:
        vals.append(module.widths.get(glyph, 0) if glyph else 0)
    rows = []
    for i in range(0, 256, 16):
        rows.append("    " + ", ".join("%d" % v for v in vals[i:i + 16]) + ",")
    return "const std::array<std::uint16_t, 256> %s = {{\n%s\n}};\n" % (name, "\n".join(rows))


def main():
    w = sys.stdout.write
    w("// Generated by tools/gen_pdf_tables.py. Do not edit.\n")
    w("//\n// Glyph names and encoding vectors are derived from the Adobe Glyph List:\n")
    w(adobe_notice() + "\n\n")
    w('#include "pdf_tables.hpp"\n\n')
    w("namespace plainlang::ingest::pdf_tables {\n\n")
    w(code_table("kWinAnsi", WinAnsiEncoding) + "\n")
    w(code_table("kMacRoman", MacRomanEncoding) + "\n")
    w(code_table("kStandard", StandardEncoding) + "\n")
    w(code_table("kPdfDoc", PDFDocEncoding) + "\n")
    w(width_table("kHelveticaWidths", helv) + "\n")
    w(width_table("kHelveticaBoldWidths", helvb) + "\n")
    w(width_table("kTimesRomanWidths", times) + "\n")
    w(width_table("kTimesBoldWidths", timesb) + "\n")
    entries = sorted((k, v) for k, v in names.items() if isinstance(v, int))
    w("const std::array<GlyphName, %d> kGlyphNames = {{\n" % len(entries))
    for k, v in entries:
        w('    {"%s", 0x%04X},\n' % (k, v))
    w("}};\n\n")
    w("}  // namespace plainlang::ingest::pdf_tables\n")


if __name__ == "__main__":
    main()
