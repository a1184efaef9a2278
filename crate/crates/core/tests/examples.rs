mod common;

use common::{random_text, related_source, rng};
use drc::oracles::{
    decompress, naive_greedy_cover, naive_longest_match, naive_maximality_check,
    naive_substring_concat,
};
use drc::{Block, CompressedString, CoverForest, PackedSums, PsConfig, RefIndex, SumTree};
use rand::Rng;

const WORKED: [u64; 19] = [5, 1, 4, 7, 1, 1, 6, 5, 1, 1, 2, 2, 1, 3, 5, 10, 5, 10, 2];

fn worked() -> PackedSums {
    PackedSums::from_values(PsConfig::custom(20, 0, 4, 16).unwrap(), &WORKED).unwrap()
}

fn small(z: &[u64]) -> PackedSums {
    PackedSums::from_values(PsConfig::default(), z).unwrap()
}

fn sums(ps: &PackedSums) -> Vec<u64> {
    (1..=ps.len()).map(|i| ps.sum(i).unwrap()).collect()
}

#[test]
fn small_sum_examples() {
    let ps = small(&[5, 1, 4, 7]);
    assert_eq!(ps.sum(4), Ok(17));
    assert_eq!(ps.sum(1), Ok(5));
    let mut fresh = PackedSums::new(PsConfig::default());
    for (k, d) in [3u64, 0, 2, 2, 1].into_iter().enumerate() {
        fresh.insert(k + 1, d).unwrap();
    }
    assert_eq!(fresh.sum(fresh.len()), Ok(8));
}

#[test]
fn small_search_examples() {
    let ps = worked();
    assert_eq!(ps.sum(7), Ok(25));
    assert_eq!(ps.sum(8), Ok(30));
    assert_eq!(ps.search(26), Ok(8));
    assert_eq!(small(&[0, 0, 3, 1]).search(1), Ok(3));
}

#[test]
fn small_update_examples() {
    let mut ps = small(&[5, 1, 4, 7]);
    ps.update(1, 1).unwrap();
    assert_eq!(sums(&ps), [6, 7, 11, 18]);
    let mut ps = small(&[5, 1, 4, 7]);
    ps.update(3, -2).unwrap();
    assert_eq!((ps.sum(2), ps.sum(3)), (Ok(6), Ok(8)));
    let before = ps.clone();
    ps.update(2, 0).unwrap();
    assert_eq!(sums(&ps), sums(&before));
}

#[test]
fn small_divide_examples() {
    let mut ps = worked();
    ps.divide(8, 3).unwrap();
    assert_eq!((ps.entry(8), ps.entry(9)), (Ok(3), Ok(2)));
    assert_eq!((ps.sum(8), ps.sum(9)), (Ok(28), Ok(30)));
    assert!(!ps.representatives().contains(&30));

    let mut ps = small(&[5, 1, 4]);
    ps.divide(2, 0).unwrap();
    assert_eq!(ps.values(), [5, 0, 1, 4]);
    ps.divide(4, 4).unwrap();
    assert_eq!(ps.values(), [5, 0, 1, 4, 0]);
}

#[test]
fn small_merge_examples() {
    let mut ps = worked();
    ps.divide(8, 3).unwrap();
    assert!(sums(&ps).contains(&34));
    ps.merge(12).unwrap();
    assert_eq!(ps.entry(12), Ok(4));
    assert!(!sums(&ps).contains(&34));

    let mut ps = small(&[2, 7, 0, 1]);
    ps.merge(3).unwrap();
    assert_eq!(ps.values(), [2, 7, 1]);
}

#[test]
fn small_insert_delete_examples() {
    let mut ps = small(&[5]);
    ps.insert(1, 3).unwrap();
    assert_eq!(ps.values(), [3, 5]);
    ps.delete(1).unwrap();
    assert_eq!(ps.values(), [5]);
    let mut ps = small(&[4, 0, 2]);
    ps.delete(2).unwrap();
    assert_eq!(sums(&ps), [4, 6]);
}

#[test]
fn small_rebuild_examples() {
    let mut ps = worked();
    assert_eq!(ps.representatives(), [5, 17, 25, 30, 45, 55, 60, 70]);
    ps.rebuild();
    let once = ps.clone();
    ps.rebuild();
    assert_eq!(ps, once);
    ps.merge(3).unwrap();
    ps.divide(5, 1).unwrap();
    let before = sums(&ps);
    ps.rebuild();
    assert_eq!(sums(&ps), before);
}

#[test]
fn tree_examples() {
    let values: Vec<u64> = WORKED.iter().copied().cycle().take(19 * 100).collect();
    let tree: SumTree = SumTree::from_values(PsConfig::default(), &values).unwrap();
    assert_eq!(tree.sum(4), Ok(17));
    assert_eq!(tree.sum(23), Ok(89));
    assert_eq!(tree.search(tree.total()), Ok(tree.len()));
}

#[test]
fn suffix_array_examples() {
    let idx = RefIndex::new(b"banana").unwrap();
    assert_eq!(idx.suffix_array(), [6, 4, 2, 1, 5, 3]);
    let unit = RefIndex::new(b"a").unwrap();
    assert_eq!(unit.suffix_array(), [1]);
    unit.validate().unwrap();
    let bytes: Vec<u8> = {
        let mut r = rng(40);
        (0..10_000).map(|_| r.gen()).collect()
    };
    RefIndex::new(&bytes).unwrap().validate().unwrap();
}

#[test]
fn lce_examples() {
    let idx = RefIndex::new(b"banana").unwrap();
    assert_eq!(idx.lce(2, 4), Ok(3));
    for a in 1..=6 {
        assert_eq!(idx.lce(a, a), Ok(6 - a + 1));
    }
}

#[test]
fn longest_match_examples() {
    let idx = RefIndex::new(b"banana").unwrap();
    assert_eq!(idx.longest_match(b"bananaban", 1), (6, 1));
    assert_eq!(idx.longest_match(b"bananaban", 7), (3, 1));
    assert_eq!(idx.longest_match(b"xa", 1).0, 0);
    assert_eq!(naive_longest_match(b"banana", b"bananaban", 7), (3, 1));
}

#[test]
fn concat_examples() {
    let idx = RefIndex::new(b"banana").unwrap();
    let q = |x: (usize, usize), y: (usize, usize)| {
        idx.substring_concat(Block::new(x.0, x.1), Block::new(y.0, y.1)).unwrap()
    };
    assert_eq!(q((1, 2), (3, 4)), Some(1));
    assert_eq!(q((2, 3), (2, 3)), Some(2));
    assert_eq!(q((5, 6), (1, 1)), None);
    assert_eq!(q((1, 6), (1, 1)), None);
    assert_eq!(naive_substring_concat(b"banana", Block::new(1, 1), Block::new(2, 2)), Some(1));
}

#[test]
fn compress_examples() {
    let idx = RefIndex::new(b"banana").unwrap();
    let c = CompressedString::compress(&idx, b"bananaban").unwrap();
    assert_eq!(c.blocks(), [Block::new(1, 6), Block::new(1, 3)]);
    assert_eq!(c.blocks(), naive_greedy_cover(b"banana", b"bananaban").unwrap());
    assert_eq!(CompressedString::compress(&idx, b"banana").unwrap().blocks(), [Block::new(1, 6)]);
    let empty = CompressedString::compress(&idx, b"").unwrap();
    assert_eq!((empty.num_blocks(), empty.len()), (0, 0));
}

#[test]
fn access_extract_examples() {
    let idx = RefIndex::new(b"banana").unwrap();
    let c = CompressedString::compress(&idx, b"bananaban").unwrap();
    assert_eq!(c.access(8), Ok(b'a'));
    assert_eq!(c.extract(7, 3).unwrap(), b"ban");
    assert_eq!(c.extract(1, 9).unwrap(), b"bananaban");
    let whole = CompressedString::compress(&idx, b"banana").unwrap();
    for i in 1..=6 {
        assert_eq!(whole.access(i), Ok(b"banana"[i - 1]));
    }
    let mut r = rng(41);
    let reference = random_text(&mut r, 500, b"acgt");
    let idx = RefIndex::new(&reference).unwrap();
    let s = related_source(&mut r, &reference, 700);
    let c = CompressedString::compress(&idx, &s).unwrap();
    for _ in 0..1000 {
        let i = r.gen_range(1..=s.len());
        let l = r.gen_range(1..=s.len() - i + 1);
        assert_eq!(c.extract(i, l).unwrap(), &s[i - 1..i - 1 + l]);
    }
}

#[test]
fn replace_examples() {
    let idx = RefIndex::new(b"banana").unwrap();
    let mut c = CompressedString::compress(&idx, b"bananaban").unwrap();
    c.replace(3, b'n').unwrap();
    assert_eq!(c.to_bytes(), b"bananaban");
    c.replace(7, b'n').unwrap();
    assert_eq!(c.to_bytes(), b"banananan");
    assert!(naive_maximality_check(b"banana", &c.blocks()));

    // Every single replacement on short strings.
    let mut r = rng(42);
    for _ in 0..10 {
        let reference = random_text(&mut r, 40, b"abc");
        let idx = RefIndex::new(&reference).unwrap();
        let n = r.gen_range(1..=64);
        let s = related_source(&mut r, &reference, n);
        for i in 1..=s.len() {
            for &a in b"abc" {
                let mut c = CompressedString::compress(&idx, &s).unwrap();
                c.replace(i, a).unwrap();
                let mut want = s.clone();
                want[i - 1] = a;
                assert_eq!(c.to_bytes(), want);
                assert!(naive_maximality_check(&reference, &c.blocks()));
            }
        }
    }
}

#[test]
fn insert_delete_examples() {
    let idx = RefIndex::new(b"banana").unwrap();
    let mut c = CompressedString::compress(&idx, b"").unwrap();
    for (k, &b) in b"bananaban".iter().enumerate() {
        c.insert(k + 1, b).unwrap();
    }
    assert_eq!(c.to_bytes(), b"bananaban");
    assert!(c.num_blocks() <= 3);
    c.insert(4, b'b').unwrap();
    c.delete(4).unwrap();
    assert_eq!(c.to_bytes(), b"bananaban");
}

#[test]
fn forest_examples() {
    let idx = RefIndex::new(b"banana").unwrap();
    let mut f = CoverForest::new(&idx);
    let whole = f.add(b"banana").unwrap();
    assert_eq!(f.access(whole, 3), Ok(b'n'));
    let (l, r) = f.split(whole, 4).unwrap();
    assert_eq!(f.decompress(l).unwrap(), b"ban");
    assert_eq!(f.decompress(r).unwrap(), b"ana");
    let joined = f.concat(l, r).unwrap();
    assert_eq!(f.blocks(joined).unwrap(), [Block::new(1, 6)]);

    let x = f.add(b"ban").unwrap();
    let y = f.add(b"anab").unwrap();
    let xy = f.concat(x, y).unwrap();
    assert_eq!(f.decompress(xy).unwrap(), b"bananab");
    let e = f.add(b"").unwrap();
    let same = f.concat(xy, e).unwrap();
    assert_eq!(f.decompress(same).unwrap(), b"bananab");
    assert!(naive_maximality_check(b"banana", &f.blocks(same).unwrap()));
    assert_eq!(decompress(b"banana", &f.blocks(same).unwrap()), b"bananab");
}
