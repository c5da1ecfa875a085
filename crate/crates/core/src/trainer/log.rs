use std::io::Write;

use crate::error::Result;

pub const TRAIN_LOG_HEADER: [&str; 4] = ["epoch", "loss", "sharpness", "clipped"];

/// Telemetry of one training run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    /// `loss[e]` is the loss at the start of epoch `e`; the last entry is the
    /// loss after the final step.
    pub loss: Vec<f64>,
    pub sharpness: Vec<(usize, f64)>,
    pub clip_epochs: Vec<usize>,
}

impl TrainLog {
    pub fn final_loss(&self) -> f64 {
        self.loss.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_sharpness(&self) -> Option<f64> {
        self.sharpness.last().map(|s| s.1)
    }

    /// Mean of the last `count` sharpness samples.
    pub fn late_sharpness(&self, count: usize) -> Option<f64> {
        if self.sharpness.is_empty() || count == 0 {
            return None;
        }
        let tail = &self.sharpness[self.sharpness.len().saturating_sub(count)..];
        Some(tail.iter().map(|s| s.1).sum::<f64>() / tail.len() as f64)
    }

    /// One row per logged loss; `sharpness` is empty where none was sampled.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TRAIN_LOG_HEADER)?;
        let mut sharp = self.sharpness.iter().peekable();
        let mut clips = self.clip_epochs.iter().peekable();
        for (epoch, loss) in self.loss.iter().enumerate() {
            let s = match sharp.peek() {
                Some(&&(e, v)) if e == epoch => {
                    sharp.next();
                    v.to_string()
                }
                _ => String::new(),
            };
            let clipped = match clips.peek() {
                Some(&&e) if e == epoch => {
                    clips.next();
                    true
                }
                _ => false,
            };
            w.write_record([epoch.to_string(), loss.to_string(), s, clipped.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let log = TrainLog {
            loss: vec![1.5, 0.25, 0.125],
            sharpness: vec![(0, 2.0), (2, 3.5)],
            clip_epochs: vec![0],
        };
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "epoch,loss,sharpness,clipped\n0,1.5,2,true\n1,0.25,,false\n2,0.125,3.5,false\n");
        assert_eq!(log.late_sharpness(1), Some(3.5));
        assert_eq!(log.late_sharpness(10), Some(2.75));
    }
}
