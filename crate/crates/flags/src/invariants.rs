//! Integer invariants of a derived flag from its ranks `m_0, ..., m_k`.

/// `<D_1, ..., D_k>` with `D_i = m_i - m_{i-1}`.
pub fn velocity(ranks: &[usize]) -> Vec<usize> {
    ranks.windows(2).map(|w| w[1] - w[0]).collect()
}

fn second_differences(ranks: &[usize]) -> Vec<i64> {
    let v = velocity(ranks);
    v.windows(2).map(|w| w[1] as i64 - w[0] as i64).collect()
}

/// `<D^2_2, ..., D^2_k, D_k>` with `D^2_i = D_i - D_{i-1}`.
pub fn acceleration(ranks: &[usize]) -> Vec<i64> {
    let mut out = second_differences(ranks);
    if let Some(&last) = velocity(ranks).last() {
        out.push(last as i64);
    }
    out
}

/// `<-D^2_2, ..., -D^2_k, D_k>`.
pub fn deceleration(ranks: &[usize]) -> Vec<i64> {
    let mut out: Vec<i64> = second_differences(ranks).into_iter().map(|d| -d).collect();
    if let Some(&last) = velocity(ranks).last() {
        out.push(last as i64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_step_flag() {
        let m = [3, 5, 7, 8];
        assert_eq!(velocity(&m), vec![2, 2, 1]);
        assert_eq!(deceleration(&m), vec![0, 1, 1]);
        assert_eq!(acceleration(&m), vec![0, -1, 1]);
    }
}
