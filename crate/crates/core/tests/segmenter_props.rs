use cvc_core::segmenter::{
    segment_clips, select_keyframes, shot_offset_starts, KeyframeKind, KeyframeMark, ShotProbSeries,
};
use proptest::prelude::*;

/// Straight transcription of the selection loop, used as a reference.
fn reference_marks(probs: &[f64], w: u32) -> Vec<(u32, KeyframeKind)> {
    let t = probs.len() as u32;
    let mut out = vec![(0, KeyframeKind::Init)];
    let mut last = 0;
    for i in 1..=t {
        if i - last >= w {
            out.push((i, KeyframeKind::Interval));
            last = i;
        } else if probs[i as usize - 1] > 0.5 {
            out.push((i, KeyframeKind::Shot));
            last = i;
        }
    }
    if out.last().unwrap().0 != t {
        out.push((t, KeyframeKind::Terminal));
    }
    out
}

fn series() -> impl Strategy<Value = (Vec<f64>, u32)> {
    (1usize..300, 1u32..48, 0.0f64..0.3).prop_flat_map(|(t, w, density)| {
        let p = prop::collection::vec(
            prop_oneof![
                1 => Just(0.5),
                10 => (0.0f64..1.0).prop_map(move |u| if u < density { 0.9 } else { u * 0.5 }),
            ],
            t,
        );
        (p, Just(w))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn selection_invariants((probs, w) in series()) {
        let t = probs.len() as u32;
        let marks = select_keyframes(&ShotProbSeries::new(probs.clone()).unwrap(), w).unwrap();
        let got: Vec<_> = marks.iter().map(|m| (m.index, m.kind)).collect();
        prop_assert_eq!(&got, &reference_marks(&probs, w));

        prop_assert_eq!(marks[0], KeyframeMark { index: 0, kind: KeyframeKind::Init });
        prop_assert_eq!(marks.last().unwrap().index, t);
        for pair in marks.windows(2) {
            prop_assert!(pair[1].index > pair[0].index);
            prop_assert!(pair[1].index - pair[0].index <= w, "gap {} > {w}", pair[1].index - pair[0].index);
        }
        for (i, &p) in probs.iter().enumerate() {
            if p > 0.5 {
                prop_assert!(marks.iter().any(|m| m.index == i as u32 + 1));
            }
            if p == 0.5 {
                prop_assert!(marks.iter().all(|m| m.index != i as u32 + 1 || m.kind != KeyframeKind::Shot));
            }
        }

        let clips = segment_clips(&marks).unwrap();
        prop_assert_eq!(clips.len(), marks.len() - 1);
        let offsets = shot_offset_starts(&marks, &clips);
        // Each frame 0..=T is exactly one of: mark, intermediate, shifted clip start.
        let mut seen = vec![0u8; t as usize + 1];
        for m in &marks {
            seen[m.index as usize] += 1;
        }
        for c in &clips {
            for f in c.intermediate_frames() {
                seen[f as usize] += 1;
            }
        }
        for &s in &offsets {
            seen[s as usize] += 1;
        }
        prop_assert!(seen.iter().all(|&n| n == 1), "{seen:?}");
        let intermediates: u32 = clips.iter().map(|c| c.intermediate_count()).sum();
        prop_assert_eq!(intermediates as usize + marks.len() + offsets.len(), t as usize + 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn selection_is_deterministic((probs, w) in series()) {
        let s = ShotProbSeries::new(probs).unwrap();
        prop_assert_eq!(select_keyframes(&s, w).unwrap(), select_keyframes(&s, w).unwrap());
    }
}

#[test]
fn no_shot_trace() {
    let marks = select_keyframes(&ShotProbSeries::zeros(10), 4).unwrap();
    let idx: Vec<u32> = marks.iter().map(|m| m.index).collect();
    assert_eq!(idx, [0, 4, 8, 10]);
    let clips = segment_clips(&marks).unwrap();
    let spans: Vec<(u32, u32)> = clips.iter().map(|c| (c.start, c.end)).collect();
    assert_eq!(spans, [(0, 4), (4, 8), (8, 10)]);
}

#[test]
fn shot_at_six_trace() {
    let mut p = vec![0.0; 10];
    p[5] = 0.9;
    let marks = select_keyframes(&ShotProbSeries::new(p).unwrap(), 4).unwrap();
    let got: Vec<(u32, KeyframeKind)> = marks.iter().map(|m| (m.index, m.kind)).collect();
    assert_eq!(
        got,
        [
            (0, KeyframeKind::Init),
            (4, KeyframeKind::Interval),
            (6, KeyframeKind::Shot),
            (10, KeyframeKind::Interval),
        ]
    );
    let clips = segment_clips(&marks).unwrap();
    let spans: Vec<(u32, u32)> = clips.iter().map(|c| (c.start, c.end)).collect();
    assert_eq!(spans, [(0, 4), (4, 6), (7, 10)]);
    assert_eq!(shot_offset_starts(&marks, &clips), [7]);
}
