use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use drc::cover::greedy_cover;
use drc::cover_file::{self, CoverFileError};
use drc::script::{escape_bytes, parse_script, EditOp};
use drc::{Block, CompressedString, CoverError, RefIndex};

#[derive(Parser)]
#[command(name = "drc", version, about = "Compress and edit files relative to a reference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a cover of SRC relative to REF.
    Compress {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Restore the original bytes from a cover file.
    Decompress {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply an edit script to a cover file.
    Edit {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check that a cover file is well formed and maximal.
    Verify {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Print block and size statistics of a cover file.
    Stats {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
    },
}

enum Failure {
    Io(PathBuf, io::Error),
    MissingChar { offset: usize, byte: u8 },
    File(CoverFileError),
    Parse(String),
    Op { line: usize, message: String },
    NotMaximal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(..) => 1,
            Failure::MissingChar { .. } => 2,
            Failure::File(CoverFileError::ChecksumMismatch { .. }) => 3,
            Failure::File(CoverFileError::Malformed(_)) => 4,
            Failure::Parse(_) => 5,
            Failure::Op { .. } => 6,
            Failure::NotMaximal(_) => 7,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Io(path, e) => format!("{}: {e}", path.display()),
            Failure::MissingChar { offset, byte } => {
                format!("byte {byte:#04x} at offset {offset} does not occur in the reference")
            }
            Failure::File(e) => e.to_string(),
            Failure::Parse(m) => format!("script parse error: {m}"),
            Failure::Op { line, message } => format!("line {line}: {message}"),
            Failure::NotMaximal(m) => format!("cover is not maximal: {m}"),
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Io(path.to_owned(), e))
}

fn write(path: &Path, data: &[u8]) -> Result<(), Failure> {
    fs::write(path, data).map_err(|e| Failure::Io(path.to_owned(), e))
}

/// Builds the index; an empty reference has no index and contains no byte.
fn index(reference: &[u8]) -> Option<RefIndex> {
    RefIndex::new(reference).ok()
}

fn load(reference: &Path, input: &Path) -> Result<(Vec<u8>, Vec<u8>, Vec<Block>), Failure> {
    let r = read(reference)?;
    let data = read(input)?;
    let blocks = cover_file::decode(&r, &data).map_err(Failure::File)?;
    Ok((r, data, blocks))
}

fn compress(reference: &Path, src: &Path, out: &Path) -> Result<(), Failure> {
    let r = read(reference)?;
    let s = read(src)?;
    let blocks = match index(&r) {
        Some(idx) => greedy_cover(&idx, &s).map_err(|e| match e {
            CoverError::CharNotInReference { position, byte } => Failure::MissingChar {
                offset: position - 1,
                byte,
            },
            other => unreachable!("greedy cover only fails on missing bytes: {other}"),
        })?,
        None if s.is_empty() => Vec::new(),
        None => return Err(Failure::MissingChar { offset: 0, byte: s[0] }),
    };
    let data = cover_file::encode(&r, &blocks);
    write(out, &data)?;
    let body = data.len() - 29;
    let ratio = if s.is_empty() { 0.0 } else { body as f64 / s.len() as f64 };
    println!("n={} N={}", blocks.len(), s.len());
    println!("ratio={ratio:.6}");
    Ok(())
}

fn decompress(reference: &Path, input: &Path, out: &Path) -> Result<(), Failure> {
    let (r, _, blocks) = load(reference, input)?;
    let bytes: Vec<u8> = blocks.iter().flat_map(|b| b.slice(&r)).copied().collect();
    write(out, &bytes)
}

fn edit(reference: &Path, input: &Path, script: &Path, out: &Path) -> Result<(), Failure> {
    let (r, data, blocks) = load(reference, input)?;
    let text = read(script)?;
    let ops = parse_script(&text).map_err(|e| Failure::Parse(e.to_string()))?;
    if ops.is_empty() {
        return write(out, &data);
    }
    let Some(idx) = index(&r) else {
        return Err(Failure::Op {
            line: ops[0].line,
            message: "the reference is empty".into(),
        });
    };
    let mut cover = CompressedString::from_blocks(&idx, &blocks)
        .map_err(|e| Failure::File(CoverFileError::Malformed(e.to_string())))?;
    let stdout = io::stdout();
    let mut stdout = stdout.lock();
    for step in ops {
        let fail = |e: CoverError| Failure::Op {
            line: step.line,
            message: e.to_string(),
        };
        match step.op {
            EditOp::Access(i) => {
                let b = cover.access(i).map_err(fail)?;
                let _ = writeln!(stdout, "{}", escape_bytes(&[b]));
            }
            EditOp::Extract(i, len) => {
                let bytes = cover.extract(i, len).map_err(fail)?;
                let _ = writeln!(stdout, "{}", escape_bytes(&bytes));
            }
            EditOp::Replace(i, c) => cover.replace(i, c).map_err(fail)?,
            EditOp::Insert(i, c) => cover.insert(i, c).map_err(fail)?,
            EditOp::Delete(i) => cover.delete(i).map_err(fail)?,
        }
    }
    write(out, &cover_file::encode(&r, &cover.blocks()))
}

fn verify(reference: &Path, input: &Path) -> Result<(), Failure> {
    let (r, _, blocks) = load(reference, input)?;
    if blocks.len() >= 2 {
        let idx = index(&r).expect("decoded blocks imply a non-empty reference");
        for (k, pair) in blocks.windows(2).enumerate() {
            if let Some(p) = idx.substring_concat(pair[0], pair[1]).expect("decoded blocks fit") {
                return Err(Failure::NotMaximal(format!(
                    "blocks {} and {} occur together at {p}",
                    k + 1,
                    k + 2
                )));
            }
        }
    }
    let n: usize = blocks.iter().map(Block::len).sum();
    println!("ok n={} N={n}", blocks.len());
    Ok(())
}

fn stats(reference: &Path, input: &Path) -> Result<(), Failure> {
    let (r, data, blocks) = load(reference, input)?;
    let n: usize = blocks.iter().map(Block::len).sum();
    let avg = if blocks.is_empty() { 0.0 } else { n as f64 / blocks.len() as f64 };
    println!("r={}", r.len());
    println!("n={} N={n}", blocks.len());
    println!("file_bytes={}", data.len());
    println!("avg_block={avg:.3}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compress { reference, src, out } => compress(reference, src, out),
        Command::Decompress { reference, input, out } => decompress(reference, input, out),
        Command::Edit {
            reference,
            input,
            script,
            out,
        } => edit(reference, input, script, out),
        Command::Verify { reference, input } => verify(reference, input),
        Command::Stats { reference, input } => stats(reference, input),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("drc: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
