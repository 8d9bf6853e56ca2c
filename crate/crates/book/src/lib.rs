//! Each chapter of the guide in `book/src` is included here so its Rust
//! snippets run as doc-tests.

macro_rules! chapter {
    ($name:ident, $file:literal) => {
        #[doc = include_str!(concat!("../../../book/src/", $file))]
        pub mod $name {}
    };
}

chapter!(intro, "intro.md");
chapter!(auc, "auc.md");
chapter!(bootstrap, "bootstrap.md");
chapter!(distributions, "distributions.md");
chapter!(binormal, "binormal.md");
chapter!(paradox, "paradox.md");
chapter!(audit, "audit.md");
chapter!(mitigation, "mitigation.md");
chapter!(probe, "probe.md");
chapter!(labeling, "labeling.md");
chapter!(cli, "cli.md");
