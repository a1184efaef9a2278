mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::{random_edit, random_text, related_source, rng};
use drc::oracles::{naive_edit_replay, ReplayOutput};
use drc::script::{escape_bytes, format_op, EditOp};
use tempfile::TempDir;

struct Scratch {
    dir: TempDir,
}

impl Scratch {
    fn new() -> Self {
        Scratch {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn file(&self, name: &str, data: &[u8]) -> PathBuf {
        let p = self.dir.path().join(name);
        fs::write(&p, data).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn drc(args: &[&Path]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drc")).args(args).output().unwrap()
}

fn p(s: &str) -> &Path {
    Path::new(s)
}

fn compress(t: &Scratch, r: &[u8], s: &[u8]) -> (Output, PathBuf, PathBuf) {
    let (rf, sf, out) = (t.file("ref", r), t.file("src", s), t.path("cover"));
    let o = drc(&[p("compress"), p("--ref"), &rf, p("--src"), &sf, p("--out"), &out]);
    (o, rf, out)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn compress_reports_counts() {
    let t = Scratch::new();
    let (o, ..) = compress(&t, b"banana", b"bananaban");
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("n=2 N=9\n"), "{}", stdout(&o));
    let (o, ..) = compress(&t, b"banana", b"");
    assert!(stdout(&o).starts_with("n=0 N=0\n"));
    let (o, rf, out) = compress(&t, b"banana", b"banana");
    assert!(stdout(&o).starts_with("n=1 N=6\n"));
    let v = drc(&[p("verify"), p("--ref"), &rf, p("--in"), &out]);
    assert_eq!(stdout(&v), "ok n=1 N=6\n");
}

#[test]
fn missing_byte_exits_2() {
    let t = Scratch::new();
    let (o, ..) = compress(&t, b"banana", b"bandana");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_files_are_rejected() {
    let t = Scratch::new();
    let (_, rf, out) = compress(&t, b"banana", b"bananaban");
    let data = fs::read(&out).unwrap();
    let cut = t.file("cut", &data[..data.len() - 1]);
    let back = t.path("back");
    let o = drc(&[p("decompress"), p("--ref"), &rf, p("--in"), &cut, p("--out"), &back]);
    assert_eq!(o.status.code(), Some(4));
    let other = t.file("other", b"bananas");
    let o = drc(&[p("decompress"), p("--ref"), &other, p("--in"), &out, p("--out"), &back]);
    assert_eq!(o.status.code(), Some(3));
    let o = drc(&[p("decompress"), p("--ref"), &rf, p("--in"), &t.path("nope"), p("--out"), &back]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_rejects_a_splittable_cover() {
    let t = Scratch::new();
    let rf = t.file("ref", b"banana");
    let blocks = [drc::Block::new(1, 3), drc::Block::new(4, 6)];
    let bad = t.file("bad", &drc::cover_file::encode(b"banana", &blocks));
    let o = drc(&[p("verify"), p("--ref"), &rf, p("--in"), &bad]);
    assert_eq!(o.status.code(), Some(7));
}

fn edit(t: &Scratch, rf: &Path, cover: &Path, script: &[u8]) -> (Output, PathBuf) {
    let sf = t.file("script", script);
    let out = t.path("edited");
    let o = drc(&[p("edit"), p("--ref"), rf, p("--in"), cover, p("--script"), &sf, p("--out"), &out]);
    (o, out)
}

fn decompress(rf: &Path, cover: &Path, t: &Scratch) -> Vec<u8> {
    let back = t.path("back");
    let o = drc(&[p("decompress"), p("--ref"), rf, p("--in"), cover, p("--out"), &back]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    fs::read(back).unwrap()
}

#[test]
fn edit_scripts() {
    let t = Scratch::new();
    let (_, rf, cover) = compress(&t, b"banana", b"bananaban");
    let (o, out) = edit(&t, &rf, &cover, b"R 1 n\nA 1\nX 7 3\n");
    assert!(o.status.success());
    assert_eq!(stdout(&o), "n\nban\n");
    assert_eq!(decompress(&rf, &out, &t), b"nananaban");

    let (o, out) = edit(&t, &rf, &cover, b"");
    assert!(o.status.success());
    assert_eq!(fs::read(&out).unwrap(), fs::read(&cover).unwrap());

    let (o, _) = edit(&t, &rf, &cover, b"A 1\nQ 2\n");
    assert_eq!(o.status.code(), Some(5));
    let (o, _) = edit(&t, &rf, &cover, b"A 1\n\nD 10\n");
    assert_eq!(o.status.code(), Some(6));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn random_script_matches_replay() {
    let mut rng = rng(70);
    let t = Scratch::new();
    let alphabet = b"ab \\\n";
    let reference = random_text(&mut rng, 400, alphabet);
    let source = related_source(&mut rng, &reference, 300);
    let (_, rf, cover) = compress(&t, &reference, &source);
    let mut ops = Vec::new();
    let mut n = source.len();
    for _ in 0..1000 {
        let op = random_edit(&mut rng, n, alphabet);
        n = match op {
            EditOp::Insert(..) => n + 1,
            EditOp::Delete(_) => n - 1,
            _ => n,
        };
        ops.push(op);
    }
    let script: String = ops.iter().map(|op| format_op(op) + "\n").collect();
    let (o, out) = edit(&t, &rf, &cover, script.as_bytes());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (want, outputs) = naive_edit_replay(&source, &ops).unwrap();
    let printed: String = outputs
        .iter()
        .filter_map(|r| match r {
            ReplayOutput::Byte(b) => Some(escape_bytes(&[*b]) + "\n"),
            ReplayOutput::Bytes(b) => Some(escape_bytes(b) + "\n"),
            ReplayOutput::Done => None,
        })
        .collect();
    assert_eq!(stdout(&o), printed);
    assert_eq!(decompress(&rf, &out, &t), want);
    let v = drc(&[p("verify"), p("--ref"), &rf, p("--in"), &out]);
    assert!(v.status.success());
}

#[test]
fn output_is_deterministic() {
    let t = Scratch::new();
    let (_, _, first) = compress(&t, b"abracadabra", b"cadabrabracad");
    let a = fs::read(first).unwrap();
    let (_, _, second) = compress(&t, b"abracadabra", b"cadabrabracad");
    assert_eq!(a, fs::read(second).unwrap());
}
