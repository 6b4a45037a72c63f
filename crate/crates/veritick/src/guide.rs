//! Guide chapters compiled as doc-tests; populated with the book.
